#pragma once

#include <cstdint>

namespace pic {

// Drives the lazy store and a dense reference through the same random visit
// pattern (random sampled columns, random gradients, warm-up + cosine LR) and
// measures how far the final states disagree.
struct VerifyOptions {
  std::uint64_t iterations = 10000;
  std::size_t columns = 512;
  std::size_t dim = 8;
  std::size_t visits_per_iter = 32;
  double base_lr = 0.06;
  double weight_decay = 1e-4;
  double momentum = 0.9;
  double warmup_frac = 0.05;
  std::uint64_t seed = 1;
  bool correction = true;  // false reproduces the "ignore decay/momentum" ablation
};

struct VerifyResult {
  std::uint64_t iterations = 0;
  double max_abs_deviation = 0.0;
};

VerifyResult verify_correction(const VerifyOptions& opt);

}  // namespace pic
