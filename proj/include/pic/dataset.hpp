#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pic {

struct DatasetConfig {
  std::size_t instances = 4096;
  std::size_t latent_classes = 64;
  std::size_t input_dim = 32;
  double center_scale = 1.0;    // std of the latent blob centers
  double noise_sigma = 0.25;    // per-instance offset around its center
  bool procedural = false;      // compute inputs on demand (no N x D storage)
  std::uint64_t seed = 1;
};

// Synthetic instance dataset: C Gaussian blob centers, one hidden latent
// class per instance (never exposed to training), instance i = center of its
// class plus a per-instance offset. In procedural mode the offset is
// recomputed from (seed, i) on each access, so memory stays O(C * D) at any N.
class ToyDataset {
 public:
  explicit ToyDataset(const DatasetConfig& cfg);

  std::size_t size() const { return cfg_.instances; }
  std::size_t input_dim() const { return cfg_.input_dim; }
  std::size_t latent_class_count() const { return cfg_.latent_classes; }
  std::uint32_t latent_class(std::size_t i) const;

  // Writes instance i's input vector into `out` (length input_dim).
  void input(std::size_t i, std::span<double> out) const;

 private:
  void instance_offset(std::size_t i, std::span<double> out) const;

  DatasetConfig cfg_;
  Eigen::MatrixXd centers_;        // input_dim x latent_classes
  Eigen::MatrixXd materialized_;   // input_dim x instances unless procedural
};

struct AugmentConfig {
  double noise_sigma = 0.0;  // additive Gaussian std
  double drop_prob = 0.0;    // per-coordinate zeroing probability
  double scale_min = 1.0;    // multiplicative jitter interval
  double scale_max = 1.0;

  void validate() const;
};

// One stochastic view of x: scale by s ~ U[scale_min, scale_max], add
// Gaussian noise, then zero coordinates independently with drop_prob.
void augment(std::span<const double> x, const AugmentConfig& cfg, std::mt19937_64& rng,
             std::span<double> out);

}  // namespace pic
