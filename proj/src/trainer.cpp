#include "pic/trainer.hpp"

namespace pic {

namespace {

template <typename Scalar>
RunSummary run_with(const TrainConfig& cfg, MetricsSink& sink, const std::string& checkpoint_path) {
  Trainer<Scalar> trainer(cfg);
  trainer.train(sink);

  RunSummary summary;
  summary.iterations = trainer.iteration();
  if (!sink.records().empty()) {
    const auto& last = sink.records().back();
    summary.final_loss = last.loss;
    if (last.eval.has_value()) summary.final_eval = *last.eval;
  }
  if (!checkpoint_path.empty()) {
    write_checkpoint(checkpoint_path, trainer.classifier(), trainer.hyper_log(),
                     trainer.iteration());
  }
  return summary;
}

}  // namespace

RunSummary run_training(const TrainConfig& cfg, MetricsSink& sink,
                        const std::string& checkpoint_path) {
  if (cfg.precision == Precision::kSingle) {
    return run_with<float>(cfg, sink, checkpoint_path);
  }
  return run_with<double>(cfg, sink, checkpoint_path);
}

}  // namespace pic
