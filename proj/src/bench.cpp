#include "pic/bench.hpp"

#include <chrono>

#include <nlohmann/json.hpp>

#include "pic/trainer.hpp"

namespace pic {

std::vector<BenchEntry> run_bench(const BenchOptions& opt) {
  std::vector<BenchEntry> entries;
  entries.reserve(opt.dataset_sizes.size());

  for (const std::size_t n : opt.dataset_sizes) {
    TrainConfig cfg;
    cfg.dataset.instances = n;
    cfg.dataset.latent_classes = std::min<std::size_t>(64, n);
    cfg.dataset.input_dim = opt.input_dim;
    cfg.dataset.procedural = true;  // keeps memory O(1) in N on the data side
    cfg.model = {opt.input_dim, opt.model_width, opt.model_width, opt.model_width,
                 opt.model_width};
    cfg.negatives = opt.negatives;
    cfg.batch_size = std::min(opt.batch_size, n);
    cfg.epochs = 1;  // stepped manually below
    cfg.seed = opt.seed;
    cfg.eval.every_epochs = 0;
    cfg.validate_and_normalize();

    Trainer<double> trainer(cfg);
    BenchEntry entry;
    entry.dataset_size = n;

    for (std::uint64_t s = 0; s < opt.warmup_steps; ++s) trainer.step();

    double total_ms = 0.0;
    std::uint64_t max_touched = 0;
    for (std::uint64_t s = 0; s < opt.steps; ++s) {
      const auto t0 = std::chrono::steady_clock::now();
      const StepResult sr = trainer.step();
      total_ms +=
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      entry.touched_per_step.push_back(sr.touched_columns);
      max_touched = std::max(max_touched, sr.touched_columns);
    }
    entry.touched_min = *std::min_element(entry.touched_per_step.begin(),
                                          entry.touched_per_step.end());
    entry.touched_max = max_touched;
    entry.ms_per_step = total_ms / static_cast<double>(opt.steps);
    // gathered weight + momentum block at the largest class set seen
    entry.sampled_block_bytes = static_cast<std::size_t>(max_touched) * cfg.model.projection *
                                2 * sizeof(double);
    entries.push_back(std::move(entry));
  }
  return entries;
}

nlohmann::json bench_to_json(const BenchOptions& opt, const std::vector<BenchEntry>& entries) {
  nlohmann::json out;
  out["negatives"] = opt.negatives;
  out["batch_size"] = opt.batch_size;
  out["steps"] = opt.steps;
  out["warmup_steps"] = opt.warmup_steps;
  out["entries"] = nlohmann::json::array();
  for (const auto& e : entries) {
    out["entries"].push_back({{"dataset_size", e.dataset_size},
                              {"touched_min", e.touched_min},
                              {"touched_max", e.touched_max},
                              {"ms_per_step", e.ms_per_step},
                              {"sampled_block_bytes", e.sampled_block_bytes}});
  }
  return out;
}

}  // namespace pic
