#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pic {

// Per-step cost sweep over dataset sizes at a fixed negative-sample budget.
// The classifier is fully allocated at each N; the point of the measurement
// is that per-step work tracks K, not N.
struct BenchOptions {
  std::vector<std::size_t> dataset_sizes{10000, 100000, 1000000};
  std::size_t negatives = 1024;
  std::size_t batch_size = 64;
  std::uint64_t steps = 30;
  std::uint64_t warmup_steps = 5;
  std::size_t input_dim = 16;
  std::size_t model_width = 32;   // hidden, feature, head and projection width
  std::uint64_t seed = 1;
};

struct BenchEntry {
  std::size_t dataset_size = 0;
  std::uint64_t touched_min = 0;      // per-step touched-column extremes
  std::uint64_t touched_max = 0;
  std::vector<std::uint64_t> touched_per_step;
  double ms_per_step = 0.0;           // mean over the timed steps
  std::size_t sampled_block_bytes = 0;  // resident size of the gathered block
};

std::vector<BenchEntry> run_bench(const BenchOptions& opt);

nlohmann::json bench_to_json(const BenchOptions& opt, const std::vector<BenchEntry>& entries);

}  // namespace pic
