#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "pic/evaluate.hpp"
#include "pic/metrics.hpp"
#include "pic/trainer.hpp"

using pic::CorrectionMode;
using pic::MatrixX;
using pic::MetricsSink;
using pic::SchedulerKind;
using pic::TrainConfig;
using pic::Trainer;

namespace {

// small, fast config shared by most cases
TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.dataset.instances = 128;
  cfg.dataset.latent_classes = 8;
  cfg.dataset.input_dim = 8;
  cfg.model = {8, 16, 8, 16, 16};
  cfg.window = 64;
  cfg.stride = 16;
  cfg.negatives = 64;
  cfg.batch_size = 16;
  cfg.epochs = 2;
  cfg.log_every = 1;
  cfg.eval.sample_size = 64;
  cfg.eval.knn_k = 3;
  cfg.validate_and_normalize();
  return cfg;
}

}  // namespace

TEST_CASE("first-batch loss of a fresh classifier is about log N") {
  TrainConfig cfg;
  cfg.dataset.instances = 256;
  cfg.dataset.latent_classes = 16;
  cfg.dataset.input_dim = 16;
  cfg.model = {16, 32, 16, 32, 128};
  cfg.window = 256;
  cfg.stride = 256;
  cfg.negatives = 256;   // K >= N: full soft-max
  cfg.batch_size = 256;  // N = B = |window|
  cfg.epochs = 1;
  cfg.validate_and_normalize();

  Trainer<double> trainer(cfg);
  const auto sr = trainer.step();  // loss is computed before any update
  CHECK(sr.loss == doctest::Approx(std::log(256.0)).epsilon(0.10));
  CHECK(sr.batch_size == 256);
}

TEST_CASE("zero training steps leave the model untouched") {
  const TrainConfig cfg = tiny_config();
  Trainer<double> a(cfg), b(cfg);
  // no steps taken: both trainers hold identical freshly-initialized state
  CHECK((a.model().fc1.w - b.model().fc1.w).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.classifier().weights() - b.classifier().weights()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-instance dataset trains at exactly zero loss") {
  TrainConfig cfg;
  cfg.dataset.instances = 1;
  cfg.dataset.latent_classes = 1;
  cfg.dataset.input_dim = 4;
  cfg.model = {4, 8, 4, 8, 8};
  cfg.window = 1;
  cfg.stride = 1;
  cfg.negatives = 1;
  cfg.batch_size = 1;
  cfg.epochs = 5;
  cfg.log_every = 1;
  cfg.validate_and_normalize();

  MetricsSink sink;
  Trainer<double> trainer(cfg);
  trainer.train(sink);
  CHECK(sink.records().size() == 5);
  for (const auto& rec : sink.records()) CHECK(rec.loss == 0.0);

  // with decay and momentum off as well, nothing can move
  TrainConfig frozen = cfg;
  frozen.weight_decay = 0.0;
  frozen.momentum = 0.0;
  Trainer<double> t2(frozen);
  const MatrixX<double> w0 = t2.model().fc1.w;
  MetricsSink sink2;
  t2.train(sink2);
  CHECK((t2.model().fc1.w - w0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identical seeds reproduce identical metrics, different seeds do not") {
  const TrainConfig cfg = tiny_config();
  MetricsSink a, b;
  Trainer<double>(cfg).train(a);
  Trainer<double>(cfg).train(b);
  REQUIRE(a.records().size() == b.records().size());
  for (std::size_t i = 0; i < a.records().size(); ++i) {
    CHECK(a.records()[i].loss == b.records()[i].loss);
    CHECK(a.records()[i].lr == b.records()[i].lr);
    CHECK(a.records()[i].touched_columns == b.records()[i].touched_columns);
  }

  TrainConfig other = cfg;
  other.seed = cfg.seed + 1;
  MetricsSink c;
  Trainer<double>(other).train(c);
  bool any_diff = false;
  for (std::size_t i = 0; i < c.records().size(); ++i) {
    any_diff |= c.records()[i].loss != a.records()[i].loss;
  }
  CHECK(any_diff);
}

TEST_CASE("touched columns never exceed batch + negatives") {
  const TrainConfig cfg = tiny_config();
  MetricsSink sink;
  Trainer<double> trainer(cfg);
  trainer.train(sink);
  for (const auto& rec : sink.records()) {
    CHECK(rec.touched_columns <= cfg.batch_size + cfg.negatives);
    CHECK(rec.touched_columns > 0);
  }
}

TEST_CASE("full negative sampling reduces to the all-classes soft-max") {
  TrainConfig cfg = tiny_config();
  cfg.negatives = cfg.dataset.instances;  // K >= N
  Trainer<double> trainer(cfg);
  // after one pass the buffer holds every class
  for (int i = 0; i < 20; ++i) trainer.step();
  const auto sr = trainer.step();
  CHECK(sr.touched_columns == cfg.dataset.instances);
}

TEST_CASE("lazy correction reproduces the dense-update baseline run") {
  TrainConfig cfg = tiny_config();
  cfg.epochs = 3;
  cfg.correction = CorrectionMode::kLazy;
  TrainConfig dense_cfg = cfg;
  dense_cfg.correction = CorrectionMode::kDense;

  Trainer<double> lazy(cfg), dense(dense_cfg);
  const std::uint64_t total = cfg.total_iters();
  double worst_loss_gap = 0.0;
  for (std::uint64_t t = 0; t < total; ++t) {
    const auto a = lazy.step();
    const auto b = dense.step();
    worst_loss_gap = std::max(worst_loss_gap, std::fabs(a.loss - b.loss));
    CHECK(b.touched_columns == cfg.dataset.instances);  // the cost being avoided
  }
  CHECK(worst_loss_gap <= 1e-9);

  // final classifier states agree once the lazy side is brought up to date
  std::vector<std::uint32_t> all(cfg.dataset.instances);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
  const auto la = lazy.classifier().gather_corrected(all, total, lazy.hyper_log());
  const auto db = dense.classifier().gather_corrected(all, total, dense.hyper_log());
  CHECK((la.weights - db.weights).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((la.momenta - db.momenta).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("disabling the correction visibly changes the run") {
  TrainConfig cfg = tiny_config();
  TrainConfig off = cfg;
  off.correction = CorrectionMode::kNone;

  MetricsSink with, without;
  Trainer<double>(cfg).train(with);
  Trainer<double>(off).train(without);
  REQUIRE(with.records().size() == without.records().size());
  bool diverged = false;
  for (std::size_t i = 0; i < with.records().size(); ++i) {
    diverged |= with.records()[i].loss != without.records()[i].loss;
  }
  CHECK(diverged);
}

TEST_CASE("run_training dispatches on precision and reports a summary") {
  TrainConfig cfg = tiny_config();
  cfg.eval.sample_size = 32;
  MetricsSink sink;
  const auto summary = pic::run_training(cfg, sink);
  CHECK(summary.iterations == cfg.total_iters());
  CHECK(std::isfinite(summary.final_loss));
  CHECK(summary.final_eval.knn_acc >= 0.0);

  TrainConfig single = cfg;
  single.precision = pic::Precision::kSingle;
  MetricsSink fsink;
  const auto fsummary = pic::run_training(single, fsink);
  CHECK(std::isfinite(fsummary.final_loss));
}

TEST_CASE("training loss stays finite under the default-style config") {
  TrainConfig cfg = tiny_config();
  cfg.epochs = 4;
  MetricsSink sink;
  Trainer<double>(cfg).train(sink);
  for (const auto& rec : sink.records()) CHECK(std::isfinite(rec.loss));
}

TEST_CASE("knn_eval on one-hot features is perfect") {
  const std::size_t m = 12;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(4, m);
  std::vector<std::uint32_t> labels(m);
  for (std::size_t i = 0; i < m; ++i) {
    labels[i] = static_cast<std::uint32_t>(i % 4);
    f(labels[i], static_cast<Eigen::Index>(i)) = 1.0;
  }
  CHECK(pic::knn_eval(f, labels, 3) == 1.0);
}

TEST_CASE("knn_eval on random features sits near chance") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  const std::size_t m = 600, classes = 4;
  Eigen::MatrixXd f(16, m);
  std::vector<std::uint32_t> labels(m);
  for (std::size_t i = 0; i < m; ++i) {
    labels[i] = static_cast<std::uint32_t>(i % classes);
    for (int d = 0; d < 16; ++d) f(d, static_cast<Eigen::Index>(i)) = gauss(rng);
  }
  const double acc = pic::knn_eval(f, labels, 5);
  const double chance = 1.0 / static_cast<double>(classes);
  const double sigma = std::sqrt(chance * (1 - chance) / static_cast<double>(m));
  CHECK(std::fabs(acc - chance) <= 3.0 * sigma + 0.05);
}

TEST_CASE("knn_eval is deterministic on duplicated feature sets") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd f(8, 40);
  std::vector<std::uint32_t> labels(40);
  for (int i = 0; i < 40; ++i) {
    labels[i] = static_cast<std::uint32_t>(i % 5);
    for (int d = 0; d < 8; ++d) f(d, i) = gauss(rng);
  }
  // duplicate every feature; ties between twins are broken by lowest index
  Eigen::MatrixXd f2(8, 80);
  std::vector<std::uint32_t> labels2(80);
  for (int i = 0; i < 40; ++i) {
    f2.col(2 * i) = f.col(i);
    f2.col(2 * i + 1) = f.col(i);
    labels2[2 * i] = labels[i];
    labels2[2 * i + 1] = labels[i];
  }
  const double a = pic::knn_eval(f2, labels2, 5);
  const double b = pic::knn_eval(f2, labels2, 5);
  CHECK(a == b);
}

TEST_CASE("linear probe separates separable features and not shuffled labels") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 0.05);
  const std::size_t m = 400, classes = 5;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(classes, m);
  std::vector<std::uint32_t> labels(m);
  for (std::size_t i = 0; i < m; ++i) {
    labels[i] = static_cast<std::uint32_t>(i % classes);
    for (std::size_t d = 0; d < classes; ++d) f(d, i) = gauss(rng);
    f(labels[i], static_cast<Eigen::Index>(i)) += 1.0;  // separable
  }
  CHECK(pic::linear_eval(f, labels, classes, 1) >= 0.99);

  std::vector<std::uint32_t> shuffled = labels;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const double null_acc = pic::linear_eval(f, shuffled, classes, 1);
  const double chance = 1.0 / static_cast<double>(classes);
  CHECK(std::fabs(null_acc - chance) <= 0.12);
}
