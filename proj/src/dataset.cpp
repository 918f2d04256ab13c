#include "pic/dataset.hpp"

#include <stdexcept>

namespace pic {

namespace {

// splitmix64, used to derive independent per-instance streams from one seed
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

ToyDataset::ToyDataset(const DatasetConfig& cfg) : cfg_(cfg) {
  if (cfg.instances == 0 || cfg.input_dim == 0) {
    throw std::invalid_argument("ToyDataset: instances and input_dim must be positive");
  }
  if (cfg.latent_classes == 0 || cfg.latent_classes > cfg.instances) {
    throw std::invalid_argument("ToyDataset: need 1 <= latent_classes <= instances");
  }
  std::mt19937_64 rng(mix(cfg.seed ^ 0xC0FFEEull));
  std::normal_distribution<double> gauss(0.0, 1.0);
  centers_.resize(static_cast<Eigen::Index>(cfg.input_dim),
                  static_cast<Eigen::Index>(cfg.latent_classes));
  for (Eigen::Index c = 0; c < centers_.cols(); ++c)
    for (Eigen::Index d = 0; d < centers_.rows(); ++d)
      centers_(d, c) = cfg.center_scale * gauss(rng);

  if (!cfg.procedural) {
    materialized_.resize(static_cast<Eigen::Index>(cfg.input_dim),
                         static_cast<Eigen::Index>(cfg.instances));
    std::vector<double> buf(cfg.input_dim);
    for (std::size_t i = 0; i < cfg.instances; ++i) {
      instance_offset(i, buf);
      for (std::size_t d = 0; d < cfg.input_dim; ++d) {
        materialized_(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) =
            centers_(static_cast<Eigen::Index>(d), latent_class(i)) + buf[d];
      }
    }
  }
}

std::uint32_t ToyDataset::latent_class(std::size_t i) const {
  return static_cast<std::uint32_t>(i % cfg_.latent_classes);
}

void ToyDataset::instance_offset(std::size_t i, std::span<double> out) const {
  std::mt19937_64 rng(mix(cfg_.seed ^ (0xABCDull + i)));
  std::normal_distribution<double> gauss(0.0, cfg_.noise_sigma);
  for (auto& v : out) v = gauss(rng);
}

void ToyDataset::input(std::size_t i, std::span<double> out) const {
  if (i >= cfg_.instances) throw std::out_of_range("ToyDataset::input: index out of range");
  if (out.size() != cfg_.input_dim) throw std::invalid_argument("ToyDataset::input: bad span size");
  if (!cfg_.procedural) {
    const auto col = materialized_.col(static_cast<Eigen::Index>(i));
    for (std::size_t d = 0; d < cfg_.input_dim; ++d) out[d] = col(static_cast<Eigen::Index>(d));
    return;
  }
  instance_offset(i, out);
  const auto center = centers_.col(latent_class(i));
  for (std::size_t d = 0; d < cfg_.input_dim; ++d) out[d] += center(static_cast<Eigen::Index>(d));
}

void AugmentConfig::validate() const {
  if (noise_sigma < 0.0) throw std::invalid_argument("augment.noise_sigma must be >= 0");
  if (drop_prob < 0.0 || drop_prob >= 1.0) throw std::invalid_argument("augment.drop_prob must be in [0, 1)");
  if (!(scale_min > 0.0) || scale_max < scale_min) {
    throw std::invalid_argument("augment scale range must be a positive interval");
  }
}

void augment(std::span<const double> x, const AugmentConfig& cfg, std::mt19937_64& rng,
             std::span<double> out) {
  if (x.size() != out.size()) throw std::invalid_argument("augment: size mismatch");
  std::uniform_real_distribution<double> scale(cfg.scale_min, cfg.scale_max);
  const double s = scale(rng);
  for (std::size_t d = 0; d < x.size(); ++d) out[d] = s * x[d];
  if (cfg.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (auto& v : out) v += noise(rng);
  }
  if (cfg.drop_prob > 0.0) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (auto& v : out) {
      if (unif(rng) < cfg.drop_prob) v = 0.0;
    }
  }
}

}  // namespace pic
