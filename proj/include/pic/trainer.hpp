#pragma once

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "pic/checkpoint.hpp"
#include "pic/config.hpp"
#include "pic/cosine_loss.hpp"
#include "pic/dataset.hpp"
#include "pic/encoder.hpp"
#include "pic/errors.hpp"
#include "pic/evaluate.hpp"
#include "pic/instance_store.hpp"
#include "pic/metrics.hpp"
#include "pic/scheduler.hpp"

namespace pic {

struct StepResult {
  double loss = 0.0;
  double lr = 0.0;
  std::uint64_t touched_columns = 0;
  std::size_t batch_size = 0;
};

namespace detail {
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace detail

// One training run: scheduler -> augment -> encoder -> sampled-class loss ->
// SGD on the model and the gathered classifier columns. The config must
// already be validated and normalized.
template <typename Scalar>
class Trainer {
 public:
  explicit Trainer(const TrainConfig& cfg)
      : cfg_(cfg),
        data_(cfg.dataset),
        model_(cfg.model, detail::mix_seed(cfg.seed ^ 0x5ee1ull)),
        classifier_(cfg.dataset.instances, cfg.model.projection, cfg.temperature,
                    detail::mix_seed(cfg.seed ^ 0xC1a5ull)),
        buffer_(cfg.negatives),
        lr_schedule_{cfg.base_lr, cfg.warmup_iters(), cfg.total_iters()},
        aug_rng_(detail::mix_seed(cfg.seed ^ 0xA06ull)) {
    if (cfg_.scheduler == SchedulerKind::kSliding) {
      window_sched_.emplace(cfg_.dataset.instances, cfg_.window, cfg_.stride,
                            detail::mix_seed(cfg_.seed ^ 0x5c4edull), true, cfg_.shuffle_window);
    } else {
      epoch_sched_.emplace(cfg_.dataset.instances, detail::mix_seed(cfg_.seed ^ 0x5c4edull));
    }
    // fixed evaluation subset, one per run
    eval_ids_.resize(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) eval_ids_[i] = static_cast<std::uint32_t>(i);
    if (cfg_.eval.sample_size < data_.size()) {
      std::mt19937_64 rng(detail::mix_seed(cfg_.seed ^ 0xEA1ull));
      std::shuffle(eval_ids_.begin(), eval_ids_.end(), rng);
      eval_ids_.resize(cfg_.eval.sample_size);
    }
  }

  const TrainConfig& config() const { return cfg_; }
  const ToyDataset& dataset() const { return data_; }
  EncoderModel<Scalar>& model() { return model_; }
  InstanceClassifier<Scalar>& classifier() { return classifier_; }
  const HyperLog& hyper_log() const { return log_; }
  std::uint64_t iteration() const { return iter_; }

  StepResult step() {
    const std::vector<std::uint32_t> batch = next_batch();
    const std::vector<std::uint32_t> class_set = negative_class_set(buffer_, batch);

    // one augmented view per visited instance, exactly
    MatrixX<Scalar> inputs = make_batch_inputs(batch);
    assert(static_cast<std::size_t>(inputs.cols()) == batch.size());

    std::vector<std::uint32_t> labels(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto it = std::lower_bound(class_set.begin(), class_set.end(), batch[i]);
      labels[i] = static_cast<std::uint32_t>(it - class_set.begin());
    }

    WeightBlock<Scalar> block = (cfg_.correction == CorrectionMode::kNone)
                                    ? classifier_.gather_frozen(class_set, iter_)
                                    : classifier_.gather_corrected(class_set, iter_, log_);

    model_.forward(inputs, acts_);
    // the loss mode changes only the logit map; the temperature applies to both
    FeatureBatch<Scalar> fb{acts_.z, labels};
    LossOutput<Scalar> out =
        loss_forward_backward(fb, block.weights, cfg_.temperature, cfg_.loss_mode);
    if (!std::isfinite(out.loss)) throw NumericError(diagnose_bad_batch(batch, out));

    const SgdHyper h{lr_schedule_.at(std::min(iter_, lr_schedule_.total_iters)), cfg_.weight_decay,
                     cfg_.momentum};
    model_.zero_grad();
    model_.backward(acts_, out.dZ);
    model_.apply_sgd(h, cfg_.decay_biases);
    classifier_.apply_gradient(class_set, out.dW, h, iter_);
    if (cfg_.correction == CorrectionMode::kDense) {
      classifier_.dense_tick_except(class_set, h, iter_);
    }

    log_.record(h.lr, h.weight_decay, h.momentum);
    buffer_.push(batch);
    ++iter_;
    return {out.loss, h.lr, classifier_.take_touched(), batch.size()};
  }

  // kNN (and optional linear) probe of backbone features on one held-out
  // augmented view per evaluation instance. Uses its own RNG stream, so
  // training remains bit-reproducible with or without snapshots.
  EvalSnapshot evaluate() {
    std::mt19937_64 rng(detail::mix_seed(cfg_.seed ^ (0xE7A1ull + iter_)));
    const std::size_t m = eval_ids_.size();
    MatrixX<Scalar> inputs(static_cast<Eigen::Index>(data_.input_dim()),
                           static_cast<Eigen::Index>(m));
    std::vector<double> raw(data_.input_dim()), view(data_.input_dim());
    std::vector<std::uint32_t> latents(m);
    for (std::size_t i = 0; i < m; ++i) {
      data_.input(eval_ids_[i], raw);
      augment(raw, cfg_.augment, rng, view);
      for (std::size_t d = 0; d < view.size(); ++d) {
        inputs(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) =
            static_cast<Scalar>(view[d]);
      }
      latents[i] = data_.latent_class(eval_ids_[i]);
    }
    const Eigen::MatrixXd features =
        model_.backbone_features(inputs).template cast<double>();
    EvalSnapshot snap;
    snap.knn_acc = knn_eval(features, latents, cfg_.eval.knn_k);
    if (cfg_.eval.linear_probe) {
      snap.linear_acc = linear_eval(features, latents, data_.latent_class_count(), cfg_.seed);
    }
    return snap;
  }

  void train(MetricsSink& sink) {
    const std::uint64_t total = cfg_.total_iters();
    const std::uint64_t eval_stride = cfg_.eval.every_epochs * cfg_.iters_per_epoch();
    for (std::uint64_t t = 0; t < total; ++t) {
      const auto t0 = std::chrono::steady_clock::now();
      const StepResult sr = step();
      const double wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

      const bool want_eval =
          ((eval_stride > 0 && (t + 1) % eval_stride == 0) || (t + 1 == total)) &&
          eval_ids_.size() >= 2;  // a kNN probe needs a neighbour
      if (t % cfg_.log_every == 0 || t + 1 == total || want_eval) {
        MetricsRecord rec{t, sr.loss, sr.lr, sr.touched_columns, wall_ms, std::nullopt};
        if (want_eval) rec.eval = evaluate();
        sink.push(rec);
      }
    }
    sink.flush();
  }

 private:
  std::vector<std::uint32_t> next_batch() {
    if (cursor_ >= pending_.size()) {
      pending_ = window_sched_.has_value() ? window_sched_->next_window()
                                           : epoch_sched_->next_epoch();
      cursor_ = 0;
    }
    // batches never span a window/epoch boundary; the tail yields a short
    // batch so no visit is dropped
    const std::size_t take = std::min(cfg_.batch_size, pending_.size() - cursor_);
    std::vector<std::uint32_t> batch(pending_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                     pending_.begin() + static_cast<std::ptrdiff_t>(cursor_ + take));
    cursor_ += take;
    return batch;
  }

  MatrixX<Scalar> make_batch_inputs(std::span<const std::uint32_t> batch) {
    MatrixX<Scalar> inputs(static_cast<Eigen::Index>(data_.input_dim()),
                           static_cast<Eigen::Index>(batch.size()));
    std::vector<double> raw(data_.input_dim()), view(data_.input_dim());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      data_.input(batch[i], raw);
      augment(raw, cfg_.augment, aug_rng_, view);
      for (std::size_t d = 0; d < view.size(); ++d) {
        inputs(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) =
            static_cast<Scalar>(view[d]);
      }
    }
    return inputs;
  }

  std::string diagnose_bad_batch(const std::vector<std::uint32_t>& batch,
                                 const LossOutput<Scalar>& out) const {
    std::ostringstream msg;
    msg << "non-finite loss at iteration " << iter_ << "; batch ids [";
    for (std::size_t i = 0; i < batch.size(); ++i) msg << (i ? "," : "") << batch[i];
    msg << "]; |z| max " << acts_.z.cwiseAbs().maxCoeff() << "; probs finite: "
        << (out.probs.allFinite() ? "yes" : "no");
    return msg.str();
  }

  TrainConfig cfg_;
  ToyDataset data_;
  EncoderModel<Scalar> model_;
  InstanceClassifier<Scalar> classifier_;
  RecentNegativeBuffer buffer_;
  HyperLog log_;
  LrSchedule lr_schedule_;
  std::optional<EpochScheduler> epoch_sched_;
  std::optional<SlidingWindowScheduler> window_sched_;
  std::vector<std::uint32_t> pending_;
  std::size_t cursor_ = 0;
  std::vector<std::uint32_t> eval_ids_;
  std::mt19937_64 aug_rng_;
  std::uint64_t iter_ = 0;
  EncoderActivations<Scalar> acts_;
};

struct RunSummary {
  std::uint64_t iterations = 0;
  double final_loss = 0.0;
  EvalSnapshot final_eval;
};

// Precision-dispatching driver: trains per the config, streams metrics into
// `sink`, optionally writes a final checkpoint.
RunSummary run_training(const TrainConfig& cfg, MetricsSink& sink,
                        const std::string& checkpoint_path = "");

}  // namespace pic
