#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "pic/instance_store.hpp"

namespace pic {

// Raised when a feature or weight vector has no direction (zero norm).
struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LogitMode { kCosine, kDot };

// A batch of projected features, one column per sample, plus each sample's
// position within the sampled class set.
template <typename Scalar>
struct FeatureBatch {
  MatrixX<Scalar> features;           // D x B
  std::vector<std::uint32_t> labels;  // B entries, each < |class set|
};

template <typename Scalar>
struct LossOutput {
  double loss = 0.0;
  MatrixX<Scalar> probs;  // B x C, rows sum to 1
  MatrixX<Scalar> dZ;     // D x B, gradient wrt raw features
  MatrixX<Scalar> dW;     // D x C, gradient wrt raw weight columns
};

namespace detail {

template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> column_norms(const MatrixX<Scalar>& m, const char* what) {
  Eigen::Vector<Scalar, Eigen::Dynamic> norms = m.colwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (!(norms(i) >= std::numeric_limits<Scalar>::min())) {
      throw DegenerateInputError(std::string(what) + ": zero-norm vector at column " +
                                 std::to_string(i));
    }
  }
  return norms;
}

}  // namespace detail

// Entry (i, j) = cos(w_j, z_i). All entries lie in [-1, 1].
template <typename Scalar>
MatrixX<Scalar> cosine_logits(const MatrixX<Scalar>& features, const MatrixX<Scalar>& weights) {
  if (features.rows() != weights.rows()) {
    throw std::invalid_argument("cosine_logits: feature/weight dimension mismatch");
  }
  const auto zn = detail::column_norms(features, "cosine_logits features");
  const auto wn = detail::column_norms(weights, "cosine_logits weights");
  MatrixX<Scalar> logits = features.transpose() * weights;  // B x C
  logits.array().colwise() /= zn.array();
  logits.array().rowwise() /= wn.transpose().array();
  return logits;
}

// Entry (i, j) = w_j . z_i, no normalization and no bias (the standard
// soft-max ablation mode).
template <typename Scalar>
MatrixX<Scalar> dot_logits(const MatrixX<Scalar>& features, const MatrixX<Scalar>& weights) {
  if (features.rows() != weights.rows()) {
    throw std::invalid_argument("dot_logits: feature/weight dimension mismatch");
  }
  return features.transpose() * weights;
}

// Mean negative log-likelihood of the temperature-scaled soft-max, with
// per-row max subtraction. Fills loss and probs only.
template <typename Scalar>
LossOutput<Scalar> softmax_xent(const MatrixX<Scalar>& logits,
                                std::span<const std::uint32_t> labels, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("softmax_xent: temperature must be > 0");
  const Eigen::Index batch = logits.rows();
  const Eigen::Index classes = logits.cols();
  if (static_cast<Eigen::Index>(labels.size()) != batch) {
    throw std::invalid_argument("softmax_xent: one label per sample required");
  }

  LossOutput<Scalar> out;
  // materialize the scaled logits first: the positive entry and the row max
  // must come from the same stored values, so that a one-class row yields a
  // loss of exactly zero
  out.probs = logits * static_cast<Scalar>(1.0 / temperature);
  double total = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    if (labels[i] >= static_cast<std::uint32_t>(classes)) {
      throw std::invalid_argument("softmax_xent: label outside class set");
    }
    const Scalar row_max = out.probs.row(i).maxCoeff();
    const Scalar positive = out.probs(i, labels[i]);
    out.probs.row(i) = (out.probs.row(i).array() - row_max).exp();
    const double denom = static_cast<double>(out.probs.row(i).sum());
    out.probs.row(i) /= static_cast<Scalar>(denom);
    // log-sum-exp form of -log p_label
    total += std::log(denom) - static_cast<double>(positive - row_max);
  }
  out.loss = total / static_cast<double>(batch);
  return out;
}

// Exact gradients of the mean loss wrt the raw (unnormalized) features and
// weight columns. In cosine mode the chain runs through the normalization:
//   d cos(w,z) / dz = w/(|w||z|) - cos(w,z) * z/|z|^2
// and symmetrically for w. Classes outside the sampled set receive no
// gradient by construction. `cosines` may pass the forward logits to skip
// recomputing them; it is ignored in dot mode.
template <typename Scalar>
void loss_backward(const MatrixX<Scalar>& features, const MatrixX<Scalar>& weights,
                   const MatrixX<Scalar>& probs, std::span<const std::uint32_t> labels,
                   double temperature, LogitMode mode, LossOutput<Scalar>& out,
                   const MatrixX<Scalar>* cosines = nullptr) {
  const Eigen::Index batch = features.cols();
  const Eigen::Index classes = weights.cols();
  if (probs.rows() != batch || probs.cols() != classes) {
    throw std::invalid_argument("loss_backward: probs shape mismatch");
  }

  // d loss / d logit(i,j) = (p_ij - [j == label_i]) / (B * tau)
  MatrixX<Scalar> s = probs;
  for (Eigen::Index i = 0; i < batch; ++i) s(i, labels[i]) -= Scalar(1);
  s *= static_cast<Scalar>(1.0 / (temperature * static_cast<double>(batch)));

  if (mode == LogitMode::kDot) {
    out.dZ.noalias() = weights * s.transpose();
    out.dW.noalias() = features * s;
    return;
  }

  const auto zn = detail::column_norms(features, "loss_backward features");
  const auto wn = detail::column_norms(weights, "loss_backward weights");
  MatrixX<Scalar> z_hat = features.array().rowwise() / zn.transpose().array();
  MatrixX<Scalar> w_hat = weights.array().rowwise() / wn.transpose().array();

  MatrixX<Scalar> cos_cache;
  if (cosines == nullptr) {
    cos_cache.noalias() = z_hat.transpose() * w_hat;
    cosines = &cos_cache;
  }

  const MatrixX<Scalar> sc = s.cwiseProduct(*cosines);
  const Eigen::Vector<Scalar, Eigen::Dynamic> r = sc.rowwise().sum();  // per sample
  const Eigen::Vector<Scalar, Eigen::Dynamic> q = sc.colwise().sum();  // per class

  out.dZ.noalias() = w_hat * s.transpose();
  out.dZ.noalias() -= z_hat * r.asDiagonal();
  out.dZ.array().rowwise() /= zn.transpose().array();

  out.dW.noalias() = z_hat * s;
  out.dW.noalias() -= w_hat * q.asDiagonal();
  out.dW.array().rowwise() /= wn.transpose().array();
}

// Forward + backward in one call, reusing the forward cosines.
template <typename Scalar>
LossOutput<Scalar> loss_forward_backward(const FeatureBatch<Scalar>& batch,
                                         const MatrixX<Scalar>& weights, double temperature,
                                         LogitMode mode) {
  const MatrixX<Scalar> logits = (mode == LogitMode::kCosine)
                                     ? cosine_logits(batch.features, weights)
                                     : dot_logits(batch.features, weights);
  LossOutput<Scalar> out = softmax_xent(logits, batch.labels, temperature);
  loss_backward(batch.features, weights, out.probs, batch.labels, temperature, mode, out,
                mode == LogitMode::kCosine ? &logits : nullptr);
  return out;
}

}  // namespace pic
