#include "pic/config.hpp"

#include <fstream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

namespace pic {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

void TrainConfig::validate_and_normalize(std::ostream* warnings) {
  const std::size_t n = dataset.instances;
  if (n == 0) throw ConfigError("dataset.instances must be >= 1");
  if (dataset.latent_classes == 0 || dataset.latent_classes > n) {
    throw ConfigError("dataset.latent_classes must satisfy 1 <= latent_classes <= instances");
  }
  if (dataset.input_dim == 0) throw ConfigError("dataset.input_dim must be >= 1");
  if (model.input != dataset.input_dim) {
    model.input = dataset.input_dim;  // the encoder consumes the dataset directly
  }
  if (model.hidden == 0 || model.feature == 0 || model.head_hidden == 0 || model.projection == 0) {
    throw ConfigError("model dimensions must all be >= 1");
  }
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (batch_size > n) throw ConfigError("batch_size must not exceed dataset.instances");
  if (!(temperature > 0.0)) throw ConfigError("loss.temperature must be > 0");
  if (base_lr < 0.0) throw ConfigError("optimizer.base_lr must be >= 0");
  if (weight_decay < 0.0) throw ConfigError("optimizer.weight_decay must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("optimizer.momentum must be in [0, 1)");
  if (warmup_epochs < 0.0) throw ConfigError("optimizer.warmup_epochs must be >= 0");
  augment.validate();

  if (scheduler == SchedulerKind::kSliding) {
    if (stride < 1) throw ConfigError("scheduler.stride must be >= 1");
    if (stride > window) {
      throw ConfigError("scheduler invariant violated: need stride <= window (got stride " +
                        std::to_string(stride) + " > window " + std::to_string(window) + ")");
    }
    if (window > n) {
      if (warnings != nullptr) {
        *warnings << "[config] window " << window << " exceeds dataset size " << n
                  << "; clamping window to " << n << "\n";
      }
      window = n;
      if (stride > window) stride = window;
    }
  }
  if (negatives == 0) throw ConfigError("negatives must be >= 1");
  if (negatives > n) {
    if (warnings != nullptr) {
      *warnings << "[config] negatives " << negatives << " exceeds dataset size " << n
                << "; clamping to " << n << "\n";
    }
    negatives = n;
  }
  if (eval.knn_k < 1) throw ConfigError("eval.knn_k must be >= 1");
  if (eval.sample_size < 2) throw ConfigError("eval.sample_size must be >= 2");
  if (log_every == 0) log_every = 1;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  reject_unknown_keys(j, {"dataset", "model", "scheduler", "augment", "optimizer", "loss",
                          "negatives", "batch_size", "epochs", "precision", "correction", "seed",
                          "deterministic", "log_every", "eval"},
                      "config");

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    reject_unknown_keys(d, {"instances", "latent_classes", "input_dim", "center_scale",
                            "noise_sigma", "procedural"},
                        "dataset");
    read(d, "instances", cfg.dataset.instances);
    read(d, "latent_classes", cfg.dataset.latent_classes);
    read(d, "input_dim", cfg.dataset.input_dim);
    read(d, "center_scale", cfg.dataset.center_scale);
    read(d, "noise_sigma", cfg.dataset.noise_sigma);
    read(d, "procedural", cfg.dataset.procedural);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown_keys(m, {"hidden_dim", "feature_dim", "head_hidden_dim", "projection_dim"},
                        "model");
    read(m, "hidden_dim", cfg.model.hidden);
    read(m, "feature_dim", cfg.model.feature);
    read(m, "head_hidden_dim", cfg.model.head_hidden);
    read(m, "projection_dim", cfg.model.projection);
  }
  if (j.contains("scheduler")) {
    const auto& s = j.at("scheduler");
    reject_unknown_keys(s, {"kind", "window", "stride", "shuffle_window"}, "scheduler");
    std::string kind = "sliding";
    read(s, "kind", kind);
    if (kind == "epoch") {
      cfg.scheduler = SchedulerKind::kEpoch;
    } else if (kind == "sliding") {
      cfg.scheduler = SchedulerKind::kSliding;
    } else {
      throw ConfigError("scheduler.kind must be 'epoch' or 'sliding'");
    }
    read(s, "window", cfg.window);
    read(s, "stride", cfg.stride);
    read(s, "shuffle_window", cfg.shuffle_window);
  }
  if (j.contains("augment")) {
    const auto& a = j.at("augment");
    reject_unknown_keys(a, {"noise_sigma", "drop_prob", "scale_min", "scale_max"}, "augment");
    read(a, "noise_sigma", cfg.augment.noise_sigma);
    read(a, "drop_prob", cfg.augment.drop_prob);
    read(a, "scale_min", cfg.augment.scale_min);
    read(a, "scale_max", cfg.augment.scale_max);
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    reject_unknown_keys(o, {"base_lr", "weight_decay", "momentum", "warmup_epochs", "decay_biases"},
                        "optimizer");
    read(o, "base_lr", cfg.base_lr);
    read(o, "weight_decay", cfg.weight_decay);
    read(o, "momentum", cfg.momentum);
    read(o, "warmup_epochs", cfg.warmup_epochs);
    read(o, "decay_biases", cfg.decay_biases);
  }
  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    reject_unknown_keys(l, {"temperature", "mode"}, "loss");
    read(l, "temperature", cfg.temperature);
    std::string mode = "cosine";
    read(l, "mode", mode);
    if (mode == "cosine") {
      cfg.loss_mode = LogitMode::kCosine;
    } else if (mode == "dot") {
      cfg.loss_mode = LogitMode::kDot;
    } else {
      throw ConfigError("loss.mode must be 'cosine' or 'dot'");
    }
  }
  read(j, "negatives", cfg.negatives);
  read(j, "batch_size", cfg.batch_size);
  read(j, "epochs", cfg.epochs);
  if (j.contains("precision")) {
    const std::string p = j.at("precision").get<std::string>();
    if (p == "single") {
      cfg.precision = Precision::kSingle;
    } else if (p == "double") {
      cfg.precision = Precision::kDouble;
    } else {
      throw ConfigError("precision must be 'single' or 'double'");
    }
  }
  if (j.contains("correction")) {
    const std::string c = j.at("correction").get<std::string>();
    if (c == "lazy") {
      cfg.correction = CorrectionMode::kLazy;
    } else if (c == "none") {
      cfg.correction = CorrectionMode::kNone;
    } else if (c == "dense") {
      cfg.correction = CorrectionMode::kDense;
    } else {
      throw ConfigError("correction must be 'lazy', 'none' or 'dense'");
    }
  }
  read(j, "seed", cfg.seed);
  cfg.dataset.seed = cfg.seed;
  if (j.contains("dataset") && j.at("dataset").contains("seed")) {
    throw ConfigError("unknown key 'seed' in dataset (the top-level seed drives everything)");
  }
  read(j, "deterministic", cfg.deterministic);
  read(j, "log_every", cfg.log_every);
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    reject_unknown_keys(e, {"every_epochs", "knn_k", "sample_size", "linear_probe"}, "eval");
    read(e, "every_epochs", cfg.eval.every_epochs);
    read(e, "knn_k", cfg.eval.knn_k);
    read(e, "sample_size", cfg.eval.sample_size);
    read(e, "linear_probe", cfg.eval.linear_probe);
  }
  return cfg;
}

json train_config_to_json(const TrainConfig& cfg) {
  json j;
  j["dataset"] = {{"instances", cfg.dataset.instances},
                  {"latent_classes", cfg.dataset.latent_classes},
                  {"input_dim", cfg.dataset.input_dim},
                  {"center_scale", cfg.dataset.center_scale},
                  {"noise_sigma", cfg.dataset.noise_sigma},
                  {"procedural", cfg.dataset.procedural}};
  j["model"] = {{"hidden_dim", cfg.model.hidden},
                {"feature_dim", cfg.model.feature},
                {"head_hidden_dim", cfg.model.head_hidden},
                {"projection_dim", cfg.model.projection}};
  j["scheduler"] = {{"kind", cfg.scheduler == SchedulerKind::kEpoch ? "epoch" : "sliding"},
                    {"window", cfg.window},
                    {"stride", cfg.stride},
                    {"shuffle_window", cfg.shuffle_window}};
  j["augment"] = {{"noise_sigma", cfg.augment.noise_sigma},
                  {"drop_prob", cfg.augment.drop_prob},
                  {"scale_min", cfg.augment.scale_min},
                  {"scale_max", cfg.augment.scale_max}};
  j["optimizer"] = {{"base_lr", cfg.base_lr},
                    {"weight_decay", cfg.weight_decay},
                    {"momentum", cfg.momentum},
                    {"warmup_epochs", cfg.warmup_epochs},
                    {"decay_biases", cfg.decay_biases}};
  j["loss"] = {{"temperature", cfg.temperature},
               {"mode", cfg.loss_mode == LogitMode::kCosine ? "cosine" : "dot"}};
  j["negatives"] = cfg.negatives;
  j["batch_size"] = cfg.batch_size;
  j["epochs"] = cfg.epochs;
  j["precision"] = cfg.precision == Precision::kDouble ? "double" : "single";
  switch (cfg.correction) {
    case CorrectionMode::kLazy: j["correction"] = "lazy"; break;
    case CorrectionMode::kNone: j["correction"] = "none"; break;
    case CorrectionMode::kDense: j["correction"] = "dense"; break;
  }
  j["seed"] = cfg.seed;
  j["deterministic"] = cfg.deterministic;
  j["log_every"] = cfg.log_every;
  j["eval"] = {{"every_epochs", cfg.eval.every_epochs},
               {"knn_k", cfg.eval.knn_k},
               {"sample_size", cfg.eval.sample_size},
               {"linear_probe", cfg.eval.linear_probe}};
  return j;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return train_config_from_json(j);
}

std::string config_hash(const TrainConfig& cfg) {
  const std::string canonical = train_config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pic
