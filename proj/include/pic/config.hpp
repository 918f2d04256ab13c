#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "pic/cosine_loss.hpp"
#include "pic/dataset.hpp"
#include "pic/encoder.hpp"
#include "pic/errors.hpp"

namespace pic {

enum class SchedulerKind { kEpoch, kSliding };
enum class CorrectionMode { kLazy, kNone, kDense };
enum class Precision { kSingle, kDouble };

struct EvalConfig {
  std::uint64_t every_epochs = 0;  // 0: evaluate at the end only
  std::size_t knn_k = 5;
  std::size_t sample_size = 2048;  // instances per evaluation snapshot
  bool linear_probe = false;
};

struct TrainConfig {
  DatasetConfig dataset;
  EncoderDims model;

  SchedulerKind scheduler = SchedulerKind::kSliding;
  std::size_t window = 131072;
  std::size_t stride = 16384;
  bool shuffle_window = true;

  AugmentConfig augment{0.15, 0.05, 0.6, 1.4};

  double base_lr = 0.06;
  double weight_decay = 1e-4;
  double momentum = 0.9;
  double warmup_epochs = 5.0;
  bool decay_biases = false;

  double temperature = 0.2;
  LogitMode loss_mode = LogitMode::kCosine;

  std::size_t negatives = 65536;  // K
  std::size_t batch_size = 64;
  std::uint64_t epochs = 100;     // iteration budget in epoch-equivalents
  Precision precision = Precision::kDouble;
  CorrectionMode correction = CorrectionMode::kLazy;
  std::uint64_t seed = 1;
  bool deterministic = true;
  std::uint64_t log_every = 10;  // metrics cadence in iterations

  EvalConfig eval;

  std::uint64_t iters_per_epoch() const {
    return (dataset.instances + batch_size - 1) / batch_size;
  }
  std::uint64_t total_iters() const { return epochs * iters_per_epoch(); }
  std::uint64_t warmup_iters() const {
    return static_cast<std::uint64_t>(warmup_epochs * static_cast<double>(iters_per_epoch()) + 0.5);
  }

  // Throws ConfigError on violated invariants; clamps the paper-scale window,
  // stride and negative-count defaults to the dataset size, warning on
  // `warnings` when it does.
  void validate_and_normalize(std::ostream* warnings = nullptr);
};

// JSON <-> config. Parsing applies defaults for absent keys and rejects
// unknown keys (they are typos until proven otherwise).
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig load_train_config(const std::string& path);

// FNV-1a over the canonical serialized config; stable across runs.
std::string config_hash(const TrainConfig& cfg);

}  // namespace pic
