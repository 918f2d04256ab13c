#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pic {

struct EvalSnapshot {
  double knn_acc = 0.0;
  std::optional<double> linear_acc;
};

struct MetricsRecord {
  std::uint64_t iter = 0;
  double loss = 0.0;
  double lr = 0.0;
  std::uint64_t touched_columns = 0;
  double wall_ms = 0.0;
  std::optional<EvalSnapshot> eval;
};

// One JSON object per record. Wall time is dropped in deterministic mode so
// reruns are byte-identical.
inline nlohmann::json metrics_to_json(const MetricsRecord& r, bool deterministic) {
  nlohmann::json j{{"iter", r.iter},
                   {"loss", r.loss},
                   {"lr", r.lr},
                   {"touched_columns", r.touched_columns}};
  if (!deterministic) j["wall_ms"] = r.wall_ms;
  if (r.eval.has_value()) {
    nlohmann::json e{{"knn_acc", r.eval->knn_acc}};
    if (r.eval->linear_acc.has_value()) e["linear_acc"] = *r.eval->linear_acc;
    j["eval"] = e;
  }
  return j;
}

// Collects records in memory and optionally streams them to a JSONL file.
class MetricsSink {
 public:
  MetricsSink() = default;
  MetricsSink(const std::string& path, bool deterministic)
      : deterministic_(deterministic), out_(std::in_place, path) {
    if (!*out_) throw std::runtime_error("cannot open metrics file: " + path);
  }

  void push(const MetricsRecord& r) {
    records_.push_back(r);
    if (out_.has_value()) {
      *out_ << metrics_to_json(r, deterministic_).dump() << "\n";
    }
  }

  void flush() {
    if (out_.has_value()) out_->flush();
  }

  const std::vector<MetricsRecord>& records() const { return records_; }

 private:
  bool deterministic_ = true;
  std::optional<std::ofstream> out_;
  std::vector<MetricsRecord> records_;
};

}  // namespace pic
