#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <list>
#include <random>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "pic/lazy_optimizer.hpp"
#include "pic/mat2.hpp"

namespace pic {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Corrected (weight, momentum) columns for a sampled class set, in gather
// order. Column j corresponds to ids[j].
template <typename Scalar>
struct WeightBlock {
  std::vector<std::uint32_t> ids;
  MatrixX<Scalar> weights;  // D x |ids|
  MatrixX<Scalar> momenta;  // D x |ids|
};

// Owns the D x N classifier matrix, per-class momentum vectors and per-class
// last-visit iterations. Columns are contiguous (column-major), so touching a
// class touches one contiguous block per matrix. Single-writer.
template <typename Scalar>
class InstanceClassifier {
 public:
  InstanceClassifier(std::size_t n, std::size_t dim, double temperature, std::uint64_t seed)
      : n_(n), dim_(dim), temperature_(temperature) {
    if (n < 1 || dim < 1) throw std::invalid_argument("InstanceClassifier: need N >= 1, D >= 1");
    if (!(temperature > 0.0)) throw std::invalid_argument("InstanceClassifier: need temperature > 0");
    weights_.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
    momenta_ = MatrixX<Scalar>::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
    last_visit_.assign(n, 0);

    // i.i.d. Gaussian columns, L2-normalized: dispersed initial logits, and
    // the cosine loss is scale-invariant in w anyway.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      double norm_sq = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double v = gauss(rng);
        weights_(d, i) = static_cast<Scalar>(v);
        norm_sq += v * v;
      }
      weights_.col(static_cast<Eigen::Index>(i)) /= static_cast<Scalar>(std::sqrt(norm_sq));
    }
  }

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  double temperature() const { return temperature_; }

  const MatrixX<Scalar>& weights() const { return weights_; }
  const MatrixX<Scalar>& momenta() const { return momenta_; }
  std::uint64_t last_visit(std::size_t i) const { return last_visit_.at(i); }

  std::span<Scalar> weight_column(std::size_t i) {
    return {weights_.col(static_cast<Eigen::Index>(i)).data(), dim_};
  }
  std::span<Scalar> momentum_column(std::size_t i) {
    return {momenta_.col(static_cast<Eigen::Index>(i)).data(), dim_};
  }

  // Brings every listed column up to date through iteration t_now by applying
  // the closed-form zero-gradient correction over [last_visit, t_now), then
  // returns the corrected block. Columns sharing a last-visit iteration share
  // one transfer-matrix product. Re-gathering at the same t_now is a no-op.
  WeightBlock<Scalar> gather_corrected(std::span<const std::uint32_t> ids, std::uint64_t t_now,
                                       const HyperLog& log) {
    std::unordered_map<std::uint64_t, Mat2> products;
    for (const auto id : ids) {
      check_id(id);
      const std::uint64_t t_last = last_visit_[id];
      if (t_last > t_now) throw std::out_of_range("gather_corrected: t_now precedes last visit");
      if (t_last != t_now) {
        auto [it, inserted] = products.try_emplace(t_last);
        if (inserted) it->second = log.range_product(t_last, t_now);
        apply_transfer(it->second, weight_column(id), momentum_column(id));
      }
      last_visit_[id] = t_now;
    }
    touched_ += ids.size();
    return copy_block(ids);
  }

  // Same bookkeeping without any correction: skipped iterations are simply
  // ignored (the ablation mode).
  WeightBlock<Scalar> gather_frozen(std::span<const std::uint32_t> ids, std::uint64_t t_now) {
    for (const auto id : ids) {
      check_id(id);
      last_visit_[id] = t_now;
    }
    touched_ += ids.size();
    return copy_block(ids);
  }

  // Gradient update for columns gathered at t_now: one sgd_step per column,
  // after which the column has processed iteration t_now.
  void apply_gradient(std::span<const std::uint32_t> ids, const MatrixX<Scalar>& grads,
                      const SgdHyper& h, std::uint64_t t_now) {
    if (static_cast<std::size_t>(grads.cols()) != ids.size() ||
        static_cast<std::size_t>(grads.rows()) != dim_) {
      throw std::invalid_argument("apply_gradient: gradient block shape mismatch");
    }
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const auto id = ids[j];
      check_id(id);
      if (last_visit_[id] != t_now) {
        throw std::logic_error("apply_gradient: column was not gathered at t_now");
      }
      std::span<const Scalar> g{grads.col(static_cast<Eigen::Index>(j)).data(), dim_};
      sgd_step(weight_column(id), momentum_column(id), g, h);
      last_visit_[id] = t_now + 1;
    }
  }

  // Dense-baseline tick: applies the zero-gradient update to every column not
  // in `updated_ids` (which must be sorted) and marks all columns as having
  // processed iteration t_now. O(N*D) per call; this is the cost the lazy
  // path avoids.
  void dense_tick_except(std::span<const std::uint32_t> updated_ids, const SgdHyper& h,
                         std::uint64_t t_now) {
    const Mat2 m = transfer_matrix(h.lr, h.weight_decay, h.momentum);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (k < updated_ids.size() && updated_ids[k] == i) {
        ++k;
        continue;
      }
      apply_transfer(m, weight_column(i), momentum_column(i));
      last_visit_[i] = t_now + 1;
      ++touched_;
    }
  }

  // Columns touched (gathered, updated, or densely ticked) since the last
  // call; the trainer reads this once per iteration.
  std::uint64_t take_touched() {
    const std::uint64_t t = touched_;
    touched_ = 0;
    return t;
  }

  void set_last_visit(std::size_t i, std::uint64_t t) { last_visit_.at(i) = t; }

 private:
  void check_id(std::uint32_t id) const {
    if (id >= n_) throw std::out_of_range("InstanceClassifier: class id out of range");
  }

  WeightBlock<Scalar> copy_block(std::span<const std::uint32_t> ids) const {
    WeightBlock<Scalar> block;
    block.ids.assign(ids.begin(), ids.end());
    block.weights.resize(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(ids.size()));
    block.momenta.resize(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(ids.size()));
    for (std::size_t j = 0; j < ids.size(); ++j) {
      block.weights.col(static_cast<Eigen::Index>(j)) = weights_.col(static_cast<Eigen::Index>(ids[j]));
      block.momenta.col(static_cast<Eigen::Index>(j)) = momenta_.col(static_cast<Eigen::Index>(ids[j]));
    }
    return block;
  }

  std::size_t n_, dim_;
  double temperature_;
  MatrixX<Scalar> weights_;
  MatrixX<Scalar> momenta_;
  std::vector<std::uint64_t> last_visit_;
  std::uint64_t touched_ = 0;
};

// Bounded FIFO of the most recently seen distinct instance ids. Re-pushing an
// id moves it to the most-recent slot instead of duplicating it.
class RecentNegativeBuffer {
 public:
  explicit RecentNegativeBuffer(std::size_t capacity);

  void push(std::span<const std::uint32_t> batch_ids);
  std::size_t size() const { return order_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::vector<std::uint32_t> contents() const;  // oldest first

 private:
  std::size_t capacity_;
  std::list<std::uint32_t> order_;
  std::unordered_map<std::uint32_t, std::list<std::uint32_t>::iterator> pos_;
};

// Union of the current batch (always included: they carry the positive
// logits) and the buffered negatives, deduplicated and sorted.
std::vector<std::uint32_t> negative_class_set(const RecentNegativeBuffer& buffer,
                                              std::span<const std::uint32_t> batch_ids);

}  // namespace pic
