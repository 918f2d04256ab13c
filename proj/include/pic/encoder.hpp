#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>

#include "pic/instance_store.hpp"
#include "pic/lazy_optimizer.hpp"

namespace pic {

template <typename Scalar>
using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;

struct EncoderDims {
  std::size_t input = 32;
  std::size_t hidden = 128;
  std::size_t feature = 64;      // backbone output, used for evaluation
  std::size_t head_hidden = 128;
  std::size_t projection = 128;  // head output, used by the loss
};

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> w;   // out x in
  VectorX<Scalar> b;
  MatrixX<Scalar> gw;
  VectorX<Scalar> gb;
  MatrixX<Scalar> mw;  // momentum buffers
  VectorX<Scalar> mb;

  void init(std::size_t out, std::size_t in, double std_dev, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, std_dev);
    w.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = static_cast<Scalar>(gauss(rng));
    b = VectorX<Scalar>::Zero(static_cast<Eigen::Index>(out));
    gw = MatrixX<Scalar>::Zero(w.rows(), w.cols());
    gb = VectorX<Scalar>::Zero(b.size());
    mw = MatrixX<Scalar>::Zero(w.rows(), w.cols());
    mb = VectorX<Scalar>::Zero(b.size());
  }

  MatrixX<Scalar> forward(const MatrixX<Scalar>& x) const {
    return (w * x).colwise() + b;
  }

  // Accumulates gw/gb and returns the gradient wrt the layer input.
  MatrixX<Scalar> backward(const MatrixX<Scalar>& x, const MatrixX<Scalar>& dy) {
    gw.noalias() += dy * x.transpose();
    gb.noalias() += dy.rowwise().sum();
    return w.transpose() * dy;
  }

  void zero_grad() {
    gw.setZero();
    gb.setZero();
  }

  void apply_sgd(const SgdHyper& h, bool decay_biases) {
    std::span<Scalar> wspan{w.data(), static_cast<std::size_t>(w.size())};
    std::span<Scalar> mwspan{mw.data(), static_cast<std::size_t>(mw.size())};
    std::span<const Scalar> gwspan{gw.data(), static_cast<std::size_t>(gw.size())};
    step_model(wspan, gwspan, mwspan, h, /*decay=*/true);
    std::span<Scalar> bspan{b.data(), static_cast<std::size_t>(b.size())};
    std::span<Scalar> mbspan{mb.data(), static_cast<std::size_t>(mb.size())};
    std::span<const Scalar> gbspan{gb.data(), static_cast<std::size_t>(gb.size())};
    step_model(bspan, gbspan, mbspan, h, decay_biases);
  }
};

template <typename Scalar>
struct EncoderActivations {
  MatrixX<Scalar> x;       // input, D_in x B
  MatrixX<Scalar> h1;      // post-ReLU hidden, kept for the backward mask
  MatrixX<Scalar> feature; // backbone output
  MatrixX<Scalar> h2;      // post-ReLU head hidden
  MatrixX<Scalar> z;       // projected output
};

// Backbone (input -> hidden -> feature, ReLU between) plus a 2-layer
// projection head (feature -> head_hidden -> projection, ReLU between, linear
// output). The feature output feeds evaluation; the head output feeds the
// loss and is dropped at evaluation time.
template <typename Scalar>
class EncoderModel {
 public:
  DenseLayer<Scalar> fc1, fc2, head1, head2;

  EncoderModel(const EncoderDims& dims, std::uint64_t seed) : dims_(dims) {
    std::mt19937_64 rng(seed);
    // He for the ReLU-fed layers, Xavier-ish for the linear outputs
    fc1.init(dims.hidden, dims.input, std::sqrt(2.0 / static_cast<double>(dims.input)), rng);
    fc2.init(dims.feature, dims.hidden, std::sqrt(1.0 / static_cast<double>(dims.hidden)), rng);
    head1.init(dims.head_hidden, dims.feature, std::sqrt(2.0 / static_cast<double>(dims.feature)), rng);
    head2.init(dims.projection, dims.head_hidden, std::sqrt(1.0 / static_cast<double>(dims.head_hidden)), rng);
  }

  const EncoderDims& dims() const { return dims_; }

  void forward(const MatrixX<Scalar>& x, EncoderActivations<Scalar>& acts) const {
    acts.x = x;
    acts.h1 = fc1.forward(x).cwiseMax(Scalar(0));
    acts.feature = fc2.forward(acts.h1);
    acts.h2 = head1.forward(acts.feature).cwiseMax(Scalar(0));
    acts.z = head2.forward(acts.h2);
  }

  // Backbone features only (evaluation path; the head is not used).
  MatrixX<Scalar> backbone_features(const MatrixX<Scalar>& x) const {
    return fc2.forward(fc1.forward(x).cwiseMax(Scalar(0)));
  }

  void zero_grad() {
    fc1.zero_grad();
    fc2.zero_grad();
    head1.zero_grad();
    head2.zero_grad();
  }

  void backward(const EncoderActivations<Scalar>& acts, const MatrixX<Scalar>& dz) {
    MatrixX<Scalar> d_h2 = head2.backward(acts.h2, dz);
    d_h2 = d_h2.cwiseProduct((acts.h2.array() > Scalar(0)).template cast<Scalar>().matrix());
    MatrixX<Scalar> d_feat = head1.backward(acts.feature, d_h2);
    MatrixX<Scalar> d_h1 = fc2.backward(acts.h1, d_feat);
    d_h1 = d_h1.cwiseProduct((acts.h1.array() > Scalar(0)).template cast<Scalar>().matrix());
    fc1.backward(acts.x, d_h1);
  }

  void apply_sgd(const SgdHyper& h, bool decay_biases = false) {
    fc1.apply_sgd(h, decay_biases);
    fc2.apply_sgd(h, decay_biases);
    head1.apply_sgd(h, decay_biases);
    head2.apply_sgd(h, decay_biases);
  }

  void set_zero() {
    for (DenseLayer<Scalar>* l : {&fc1, &fc2, &head1, &head2}) {
      l->w.setZero();
      l->b.setZero();
    }
  }

  // Visits every parameter with its gradient slot (weights first, then bias,
  // per layer). Used by gradient checks.
  void for_each_param(const std::function<void(Scalar&, Scalar&)>& fn) {
    for (DenseLayer<Scalar>* l : {&fc1, &fc2, &head1, &head2}) {
      for (Eigen::Index i = 0; i < l->w.size(); ++i) fn(l->w.data()[i], l->gw.data()[i]);
      for (Eigen::Index i = 0; i < l->b.size(); ++i) fn(l->b.data()[i], l->gb.data()[i]);
    }
  }

 private:
  EncoderDims dims_;
};

}  // namespace pic
