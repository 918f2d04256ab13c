// Command-line driver: train on synthetic instance datasets, inspect
// scheduler visit statistics, verify the lazy weight correction against the
// dense oracle, and benchmark per-step cost across dataset sizes.
//
// Exit codes: 0 ok, 2 invalid configuration, 3 numeric failure during
// training, 4 verification failure.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pic/bench.hpp"
#include "pic/config.hpp"
#include "pic/metrics.hpp"
#include "pic/scheduler.hpp"
#include "pic/trainer.hpp"
#include "pic/verify.hpp"

namespace {

constexpr const char* kVersion = "pic 0.1.0";

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct TrainArgs {
  std::string config_path;
  std::string out_dir = "run";
  // flag overrides; only applied when the user passed them
  std::uint64_t seed = 0;
  std::uint64_t epochs = 0;
  std::size_t batch_size = 0;
  std::size_t negatives = 0;
  std::size_t window = 0;
  std::size_t stride = 0;
  std::string scheduler, correction, loss_mode, precision;
  double lr = -1.0, weight_decay = -1.0, momentum = -1.0;
  std::uint64_t log_every = 0;
  std::uint64_t eval_every = 0;
};

int cmd_train(const TrainArgs& args, const CLI::App& sub) {
  pic::TrainConfig cfg = pic::load_train_config(args.config_path);

  // flags win over the file; the file wins for everything not passed
  if (sub.count("--seed") > 0) cfg.seed = args.seed;
  if (sub.count("--epochs") > 0) cfg.epochs = args.epochs;
  if (sub.count("--batch-size") > 0) cfg.batch_size = args.batch_size;
  if (sub.count("--negatives") > 0) cfg.negatives = args.negatives;
  if (sub.count("--window") > 0) cfg.window = args.window;
  if (sub.count("--stride") > 0) cfg.stride = args.stride;
  if (sub.count("--lr") > 0) cfg.base_lr = args.lr;
  if (sub.count("--weight-decay") > 0) cfg.weight_decay = args.weight_decay;
  if (sub.count("--momentum") > 0) cfg.momentum = args.momentum;
  if (sub.count("--log-every") > 0) cfg.log_every = args.log_every;
  if (sub.count("--eval-every") > 0) cfg.eval.every_epochs = args.eval_every;
  if (sub.count("--scheduler") > 0) {
    if (args.scheduler == "epoch") {
      cfg.scheduler = pic::SchedulerKind::kEpoch;
    } else if (args.scheduler == "sliding") {
      cfg.scheduler = pic::SchedulerKind::kSliding;
    } else {
      throw pic::ConfigError("--scheduler must be 'epoch' or 'sliding'");
    }
  }
  if (sub.count("--correction") > 0) {
    if (args.correction == "lazy") {
      cfg.correction = pic::CorrectionMode::kLazy;
    } else if (args.correction == "none") {
      cfg.correction = pic::CorrectionMode::kNone;
    } else if (args.correction == "dense") {
      cfg.correction = pic::CorrectionMode::kDense;
    } else {
      throw pic::ConfigError("--correction must be 'lazy', 'none' or 'dense'");
    }
  }
  if (sub.count("--loss-mode") > 0) {
    if (args.loss_mode == "cosine") {
      cfg.loss_mode = pic::LogitMode::kCosine;
    } else if (args.loss_mode == "dot") {
      cfg.loss_mode = pic::LogitMode::kDot;
    } else {
      throw pic::ConfigError("--loss-mode must be 'cosine' or 'dot'");
    }
  }
  if (sub.count("--precision") > 0) {
    if (args.precision == "single") {
      cfg.precision = pic::Precision::kSingle;
    } else if (args.precision == "double") {
      cfg.precision = pic::Precision::kDouble;
    } else {
      throw pic::ConfigError("--precision must be 'single' or 'double'");
    }
  }
  cfg.dataset.seed = cfg.seed;
  cfg.validate_and_normalize(&std::cerr);

  std::filesystem::create_directories(args.out_dir);
  const std::string metrics_path = args.out_dir + "/metrics.jsonl";
  const std::string checkpoint_path = args.out_dir + "/checkpoint.bin";
  const std::string config_path = args.out_dir + "/config.json";
  const std::string manifest_path = args.out_dir + "/manifest.json";

  nlohmann::json manifest{{"version", kVersion},
                          {"config_hash", pic::config_hash(cfg)},
                          {"seed", cfg.seed},
                          {"deterministic", cfg.deterministic},
                          {"started_at", iso_timestamp()}};

  {
    std::ofstream out(config_path);
    out << pic::train_config_to_json(cfg).dump(2) << "\n";
  }

  pic::MetricsSink sink(metrics_path, cfg.deterministic);
  const pic::RunSummary summary = pic::run_training(cfg, sink, checkpoint_path);

  manifest["finished_at"] = iso_timestamp();
  manifest["iterations"] = summary.iterations;
  manifest["final_loss"] = summary.final_loss;
  manifest["final_knn_acc"] = summary.final_eval.knn_acc;
  manifest["artifacts"] = {metrics_path, checkpoint_path, config_path};
  {
    std::ofstream out(manifest_path);
    out << manifest.dump(2) << "\n";
  }
  std::cout << "trained " << summary.iterations << " iterations; final loss " << summary.final_loss
            << "; final knn_acc " << summary.final_eval.knn_acc << "\n";
  return 0;
}

struct SchedStatsArgs {
  std::size_t n = 4096;
  std::string kind = "sliding";
  std::size_t window = 512;
  std::size_t stride = 64;
  std::uint64_t samples = 0;  // 0: pick ~50 visits per instance
  std::uint64_t seed = 1;
  bool no_window_shuffle = false;
};

int cmd_sched_stats(const SchedStatsArgs& args) {
  if (args.n == 0) throw pic::ConfigError("--n must be >= 1");
  const std::uint64_t samples = args.samples > 0 ? args.samples : 50ull * args.n;

  pic::IndexSequence stream;
  stream.reserve(samples);
  if (args.kind == "epoch") {
    pic::EpochScheduler sched(args.n, args.seed);
    while (stream.size() < samples) {
      const auto epoch = sched.next_epoch();
      stream.insert(stream.end(), epoch.begin(), epoch.end());
    }
  } else if (args.kind == "sliding") {
    pic::SlidingWindowScheduler sched(args.n, args.window, args.stride, args.seed,
                                      /*shuffle_init=*/true,
                                      /*shuffle_window=*/!args.no_window_shuffle);
    while (stream.size() < samples) {
      const auto window = sched.next_window();
      stream.insert(stream.end(), window.begin(), window.end());
    }
  } else {
    throw pic::ConfigError("--scheduler must be 'epoch' or 'sliding'");
  }
  stream.resize(samples);

  const pic::GapStats stats = pic::visit_gap_stats(stream, args.n);
  nlohmann::json out{{"scheduler", args.kind},
                     {"n", args.n},
                     {"samples", samples},
                     {"seed", args.seed},
                     {"num_gaps", stats.gaps.size()},
                     {"mean_gap", stats.mean_gap},
                     {"median_gap", stats.median_gap},
                     {"never_revisited", stats.never_revisited}};
  if (args.kind == "sliding") {
    out["window"] = args.window;
    out["stride"] = args.stride;
    out["window_shuffle"] = !args.no_window_shuffle;
    out["majority_ratio"] = pic::majority_ratio(args.window, args.stride);
    out["frac_within_window"] = stats.frac_within(args.window);
    out["frac_within_2x_window"] = stats.frac_within(2 * args.window);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct VerifyArgs {
  std::uint64_t iters = 10000;
  std::size_t columns = 512;
  std::size_t dim = 8;
  std::uint64_t seed = 1;
  bool no_correction = false;
};

int cmd_verify_correction(const VerifyArgs& args) {
  pic::VerifyOptions opt;
  opt.iterations = args.iters;
  opt.columns = args.columns;
  opt.dim = args.dim;
  opt.seed = args.seed;
  opt.correction = !args.no_correction;
  const pic::VerifyResult result = pic::verify_correction(opt);
  std::cout << "iterations " << result.iterations << ", max abs deviation from dense oracle: "
            << result.max_abs_deviation << "\n";
  return result.max_abs_deviation < 1e-9 ? 0 : 4;
}

struct BenchArgs {
  std::vector<std::size_t> sizes{10000, 100000, 1000000};
  std::size_t negatives = 1024;
  std::size_t batch = 64;
  std::uint64_t steps = 30;
  std::uint64_t warmup = 5;
  std::uint64_t seed = 1;
  bool deterministic = false;
};

int cmd_bench(const BenchArgs& args) {
  pic::BenchOptions opt;
  opt.dataset_sizes = args.sizes;
  opt.negatives = args.negatives;
  opt.batch_size = args.batch;
  opt.steps = args.steps;
  opt.warmup_steps = args.warmup;
  opt.seed = args.seed;
  const auto entries = pic::run_bench(opt);
  nlohmann::json out = pic::bench_to_json(opt, entries);
  if (args.deterministic) {
    for (auto& e : out["entries"]) e.erase("ms_per_step");  // wall time is not reproducible
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parametric instance classification trainer"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "run a training job from a JSON config");
  train->add_option("config", train_args.config_path, "path to the JSON config")->required();
  train->add_option("--out", train_args.out_dir, "output directory");
  train->add_option("--seed", train_args.seed, "override config seed");
  train->add_option("--epochs", train_args.epochs, "override epoch-equivalent length");
  train->add_option("--batch-size", train_args.batch_size, "override batch size");
  train->add_option("--negatives", train_args.negatives, "override negative-sample budget K");
  train->add_option("--window", train_args.window, "override sliding window size");
  train->add_option("--stride", train_args.stride, "override sliding window stride");
  train->add_option("--scheduler", train_args.scheduler, "epoch | sliding");
  train->add_option("--correction", train_args.correction, "lazy | none | dense");
  train->add_option("--loss-mode", train_args.loss_mode, "cosine | dot");
  train->add_option("--precision", train_args.precision, "single | double");
  train->add_option("--lr", train_args.lr, "override base learning rate");
  train->add_option("--weight-decay", train_args.weight_decay, "override weight decay");
  train->add_option("--momentum", train_args.momentum, "override momentum");
  train->add_option("--log-every", train_args.log_every, "metrics cadence in iterations");
  train->add_option("--eval-every", train_args.eval_every, "evaluation cadence in epochs");

  SchedStatsArgs sched_args;
  CLI::App* sched = app.add_subcommand("sched-stats", "simulate a scheduler, print gap stats JSON");
  sched->add_option("--n", sched_args.n, "dataset size");
  sched->add_option("--scheduler", sched_args.kind, "epoch | sliding");
  sched->add_option("--window", sched_args.window, "window size (sliding)");
  sched->add_option("--stride", sched_args.stride, "stride (sliding)");
  sched->add_option("--samples", sched_args.samples, "stream length to simulate");
  sched->add_option("--seed", sched_args.seed, "rng seed");
  sched->add_flag("--no-window-shuffle", sched_args.no_window_shuffle,
                  "emit windows in permutation order");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify-correction",
                                        "compare the lazy correction against the dense oracle");
  verify->add_option("--iters", verify_args.iters, "iterations to simulate");
  verify->add_option("--columns", verify_args.columns, "classifier columns");
  verify->add_option("--dim", verify_args.dim, "column dimension");
  verify->add_option("--seed", verify_args.seed, "rng seed");
  verify->add_flag("--no-correction", verify_args.no_correction,
                   "freeze skipped columns instead of correcting them");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "per-step cost across dataset sizes, JSON output");
  bench->add_option("--n", bench_args.sizes, "dataset sizes to sweep");
  bench->add_option("--negatives", bench_args.negatives, "negative-sample budget K");
  bench->add_option("--batch-size", bench_args.batch, "batch size");
  bench->add_option("--steps", bench_args.steps, "timed steps per size");
  bench->add_option("--warmup", bench_args.warmup, "untimed warm-up steps");
  bench->add_option("--seed", bench_args.seed, "rng seed");
  bench->add_flag("--deterministic", bench_args.deterministic, "omit wall-time fields");

  try {
    app.parse(argc, argv);
    if (train->parsed()) return cmd_train(train_args, *train);
    if (sched->parsed()) return cmd_sched_stats(sched_args);
    if (verify->parsed()) return cmd_verify_correction(verify_args);
    if (bench->parsed()) return cmd_bench(bench_args);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit clean
  } catch (const pic::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pic::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
