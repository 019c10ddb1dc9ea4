#pragma once

// Config-driven experiment runs shared by the command-line tool and tests.
//
// Seed streams derived from world.seed: 0 world, 1 demonstrations,
// 2 parameter init, 100 + i transfer world i.

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "deepirl/errors.hpp"
#include "deepirl/model_io.hpp"
#include "deepirl/network.hpp"
#include "deepirl/rng.hpp"
#include "deepirl/trainer.hpp"
#include "deepirl/world.hpp"
#include "deepirl/world_io.hpp"

namespace deepirl {

inline constexpr std::uint64_t kWorldStream = 0;
inline constexpr std::uint64_t kDemoStream = 1;
inline constexpr std::uint64_t kInitStream = 2;
inline constexpr std::uint64_t kTransferStream = 100;

inline const std::vector<std::size_t> kBenchDemoCounts = {8, 16, 32, 64, 128};

struct ExperimentConfig {
  struct WorldSpec {
    std::string kind = "objectworld";
    std::size_t M = 16;
    std::size_t C = 2;
    std::size_t n_objects = 0;  // 0 picks the default density
    std::uint64_t seed = 1;
    double discount = kDefaultDiscount;
    bool operator==(const WorldSpec&) const = default;
  };
  struct DemoSpec {
    std::size_t n_demos = 64;
    std::size_t K = 8;
    double random_action_prob = 0.3;
    bool operator==(const DemoSpec&) const = default;
  };
  struct ModelSpec {
    std::string kind = "mlp";  // linear | mlp | conv
    std::vector<std::size_t> widths = {32, 32};
    std::string features = "continuous";  // continuous | discrete | neighborhood | raw
    std::size_t conv_channels = 16;
    bool operator==(const ModelSpec&) const = default;
  };
  struct OptimizerSpec {
    double lr = 0.1;
    double damping = 1e-8;
    double weight_decay = 1e-4;
    bool operator==(const OptimizerSpec&) const = default;
  };
  struct RunSpec {
    std::size_t iters = 100;
    double epsilon = 1e-4;
    std::size_t n_transfer_worlds = 10;
    std::string output_dir = "out";
    bool operator==(const RunSpec&) const = default;
  };

  WorldSpec world;
  DemoSpec demos;
  ModelSpec model;
  OptimizerSpec optimizer;
  RunSpec run;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where,
                           std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ConfigError("unknown key '" + where + "." + item.key() + "'");
  }
}

template <std::unsigned_integral T>
void read_field(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) throw ConfigError(where + "." + key + " must be a non-negative integer");
  out = v.get<T>();
}

inline void read_field(const json& obj, const std::string& where, const char* key, double& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  out = v.get<double>();
}

inline void read_field(const json& obj, const std::string& where, const char* key, std::string& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  out = v.get<std::string>();
}

inline void read_field(const json& obj, const std::string& where, const char* key,
                       std::vector<std::size_t>& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + " must be an array");
  out.clear();
  for (const auto& x : v) {
    if (!x.is_number_unsigned()) throw ConfigError(where + "." + key + " entries must be non-negative integers");
    out.push_back(x.get<std::size_t>());
  }
}

inline const json& section(const json& root, const char* name) {
  static const json empty = json::object();
  return root.contains(name) ? root.at(name) : empty;
}

}  // namespace detail

inline WorldKind world_kind(const ExperimentConfig& cfg) {
  if (cfg.world.kind == "objectworld") return WorldKind::Objectworld;
  if (cfg.world.kind == "binaryworld") return WorldKind::Binaryworld;
  throw ConfigError("world.kind must be objectworld or binaryworld");
}

inline FeatureKind feature_kind(const ExperimentConfig& cfg) {
  const std::string& f = cfg.model.features;
  if (f == "continuous") return FeatureKind::Continuous;
  if (f == "discrete") return FeatureKind::Discrete;
  if (f == "neighborhood") return FeatureKind::Neighborhood;
  if (f == "raw") return FeatureKind::Raw;
  throw ConfigError("model.features must be continuous, discrete, neighborhood or raw");
}

/// Range checks for every field; throws ConfigError naming the offender.
inline void validate_config(const ExperimentConfig& cfg) {
  auto check = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  const WorldKind wk = world_kind(cfg);
  const FeatureKind fk = feature_kind(cfg);
  check(cfg.world.M >= 1, "world.M must be at least 1");
  if (wk == WorldKind::Objectworld) {
    check(cfg.world.C >= 2, "world.C must be at least 2");
    check(cfg.world.n_objects <= cfg.world.M * cfg.world.M, "world.n_objects exceeds the cell count");
  }
  check(cfg.world.discount >= 0.0 && cfg.world.discount < 1.0, "world.discount must lie in [0,1)");
  check(cfg.demos.n_demos >= 1, "demos.n_demos must be at least 1");
  check(cfg.demos.K >= 1, "demos.K must be at least 1");
  check(cfg.demos.random_action_prob >= 0.0 && cfg.demos.random_action_prob <= 1.0,
        "demos.random_action_prob must lie in [0,1]");
  check(cfg.model.kind == "linear" || cfg.model.kind == "mlp" || cfg.model.kind == "conv",
        "model.kind must be linear, mlp or conv");
  for (std::size_t w : cfg.model.widths) check(w >= 1, "model.widths entries must be positive");
  check(cfg.model.kind != "conv" || cfg.model.conv_channels >= 1, "model.conv_channels must be positive");
  check(feature_kind_supported(wk, fk), "model.features is not available for this world kind");
  check(cfg.optimizer.lr > 0.0, "optimizer.lr must be positive");
  check(cfg.optimizer.damping > 0.0, "optimizer.damping must be positive");
  check(cfg.optimizer.weight_decay >= 0.0, "optimizer.weight_decay must be non-negative");
  check(cfg.run.epsilon >= 0.0, "run.epsilon must be non-negative");
  check(cfg.run.n_transfer_worlds >= 1, "run.n_transfer_worlds must be at least 1");
  check(!cfg.run.output_dir.empty(), "run.output_dir must not be empty");
}

inline ExperimentConfig config_from_json(const nlohmann::json& root) {
  using detail::read_field;
  detail::reject_unknown(root, "config", {"world", "demos", "model", "optimizer", "run"});
  ExperimentConfig cfg;

  const auto& w = detail::section(root, "world");
  detail::reject_unknown(w, "world", {"kind", "M", "C", "n_objects", "seed", "discount"});
  read_field(w, "world", "kind", cfg.world.kind);
  read_field(w, "world", "M", cfg.world.M);
  read_field(w, "world", "C", cfg.world.C);
  read_field(w, "world", "n_objects", cfg.world.n_objects);
  read_field(w, "world", "seed", cfg.world.seed);
  read_field(w, "world", "discount", cfg.world.discount);

  const auto& d = detail::section(root, "demos");
  detail::reject_unknown(d, "demos", {"n_demos", "K", "random_action_prob"});
  read_field(d, "demos", "n_demos", cfg.demos.n_demos);
  read_field(d, "demos", "K", cfg.demos.K);
  read_field(d, "demos", "random_action_prob", cfg.demos.random_action_prob);

  const auto& m = detail::section(root, "model");
  detail::reject_unknown(m, "model", {"kind", "widths", "features", "conv_channels"});
  read_field(m, "model", "kind", cfg.model.kind);
  read_field(m, "model", "widths", cfg.model.widths);
  read_field(m, "model", "features", cfg.model.features);
  read_field(m, "model", "conv_channels", cfg.model.conv_channels);

  const auto& o = detail::section(root, "optimizer");
  detail::reject_unknown(o, "optimizer", {"lr", "damping", "weight_decay"});
  read_field(o, "optimizer", "lr", cfg.optimizer.lr);
  read_field(o, "optimizer", "damping", cfg.optimizer.damping);
  read_field(o, "optimizer", "weight_decay", cfg.optimizer.weight_decay);

  const auto& r = detail::section(root, "run");
  detail::reject_unknown(r, "run", {"iters", "epsilon", "n_transfer_worlds", "output_dir"});
  read_field(r, "run", "iters", cfg.run.iters);
  read_field(r, "run", "epsilon", cfg.run.epsilon);
  read_field(r, "run", "n_transfer_worlds", cfg.run.n_transfer_worlds);
  read_field(r, "run", "output_dir", cfg.run.output_dir);

  validate_config(cfg);
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["world"] = {{"kind", cfg.world.kind},   {"M", cfg.world.M},       {"C", cfg.world.C},
                {"n_objects", cfg.world.n_objects}, {"seed", cfg.world.seed},
                {"discount", cfg.world.discount}};
  j["demos"] = {{"n_demos", cfg.demos.n_demos},
                {"K", cfg.demos.K},
                {"random_action_prob", cfg.demos.random_action_prob}};
  j["model"] = {{"kind", cfg.model.kind},
                {"widths", cfg.model.widths},
                {"features", cfg.model.features},
                {"conv_channels", cfg.model.conv_channels}};
  j["optimizer"] = {{"lr", cfg.optimizer.lr},
                    {"damping", cfg.optimizer.damping},
                    {"weight_decay", cfg.optimizer.weight_decay}};
  j["run"] = {{"iters", cfg.run.iters},
              {"epsilon", cfg.run.epsilon},
              {"n_transfer_worlds", cfg.run.n_transfer_worlds},
              {"output_dir", cfg.run.output_dir}};
  return j;
}

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(root);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

// ---------------------------------------------------------------------------
// Building blocks

inline WorldConfig world_config(const ExperimentConfig& cfg) {
  WorldConfig w;
  w.kind = world_kind(cfg);
  w.size = cfg.world.M;
  w.colors = cfg.world.C;
  w.n_objects = cfg.world.n_objects;
  w.discount = cfg.world.discount;
  return w;
}

inline World make_world(const ExperimentConfig& cfg) {
  return generate_world(world_config(cfg), stream_seed(cfg.world.seed, kWorldStream));
}

inline DemoSet make_demos(const ExperimentConfig& cfg, const World& world) {
  return sample_demonstrations(world, cfg.demos.n_demos, cfg.demos.K, cfg.demos.random_action_prob,
                               stream_seed(cfg.world.seed, kDemoStream));
}

inline std::vector<LayerSpec> model_architecture(const ExperimentConfig& cfg, const ModelInput& input) {
  const std::size_t f = input.values.cols();
  if (cfg.model.kind == "linear") return linear_architecture(f);
  if (cfg.model.kind == "mlp") return mlp_architecture(f, cfg.model.widths);
  return conv_architecture(f, cfg.model.conv_channels, cfg.model.widths);
}

inline NetworkParams make_model(const ExperimentConfig& cfg, const ModelInput& input) {
  auto specs = model_architecture(cfg, input);
  if (cfg.model.kind == "linear") return zero_params(std::move(specs));
  return init_params(std::move(specs), stream_seed(cfg.world.seed, kInitStream));
}

inline TrainOptions train_options(const ExperimentConfig& cfg) {
  TrainOptions opts;
  opts.iters = cfg.run.iters;
  opts.epsilon = cfg.run.epsilon;
  opts.weight_decay = cfg.optimizer.weight_decay;
  return opts;
}

struct ExperimentRun {
  World world;
  DemoSet demos;
  TrainReport report;
};

/// generate -> sample -> train, without touching the filesystem.
inline ExperimentRun run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  World world = make_world(cfg);
  DemoSet demos = make_demos(cfg, world);
  const FeatureKind fk = feature_kind(cfg);
  NetworkParams model = make_model(cfg, model_input(world, fk));
  AdaGradState opt = make_adagrad(model, cfg.optimizer.lr, cfg.optimizer.damping);
  TrainReport report = train(world, demos, fk, std::move(model), opt, train_options(cfg));
  return {std::move(world), std::move(demos), std::move(report)};
}

inline TransferResult transfer_for(const ExperimentConfig& cfg, const NetworkParams& model) {
  return transfer_evaluate(model, cfg.run.n_transfer_worlds, world_config(cfg), feature_kind(cfg),
                           stream_seed(cfg.world.seed, kTransferStream));
}

// ---------------------------------------------------------------------------
// Commands. Each writes into cfg.run.output_dir and is byte-deterministic.

namespace detail {

inline std::filesystem::path prepare_output(const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.run.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string());
  return dir;
}

inline void write_reward_pgm(const std::filesystem::path& path, const std::vector<double>& reward,
                             std::size_t size) {
  write_file(path.string(), [&](std::ostream& os) { write_pgm(os, reward, size, size); }, true);
}

inline void write_report(const std::filesystem::path& dir, const TrainReport& report,
                         const World& world, const ModelInput& input) {
  write_file((dir / "report.csv").string(), [&](std::ostream& os) { write_report_csv(os, report); });
  save_snapshot((dir / "model.bin").string(), report.params);
  write_reward_pgm(dir / "learned_reward.pgm", predict_reward(report.params, input), world.size);
}

}  // namespace detail

/// world.txt, one CSV per flat feature representation, true_reward.pgm.
inline void cmd_generate(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto dir = detail::prepare_output(cfg);
  const World world = make_world(cfg);
  detail::write_file((dir / "world.txt").string(), [&](std::ostream& os) { write_world(os, world); });
  auto csv = [&](const char* name, const Matrix& m) {
    detail::write_file((dir / name).string(), [&](std::ostream& os) { write_matrix_csv(os, m); });
  };
  if (world.kind == WorldKind::Objectworld) {
    csv("features_continuous.csv", world.features_continuous);
    csv("features_discrete.csv", world.features_discrete);
  } else {
    csv("features_neighborhood.csv", world.features_neighborhood);
  }
  csv("features_raw.csv", model_input(world, FeatureKind::Raw).values);
  detail::write_reward_pgm(dir / "true_reward.pgm", world.true_reward, world.size);
}

/// report.csv, model.bin, learned_reward.pgm. On divergence the partial
/// report and the last parameters are written before rethrowing.
inline TrainReport cmd_train(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto dir = detail::prepare_output(cfg);
  const World world = make_world(cfg);
  const DemoSet demos = make_demos(cfg, world);
  const FeatureKind fk = feature_kind(cfg);
  const ModelInput input = model_input(world, fk);
  NetworkParams model = make_model(cfg, input);
  AdaGradState opt = make_adagrad(model, cfg.optimizer.lr, cfg.optimizer.damping);
  try {
    TrainReport report = train(world, demos, fk, std::move(model), opt, train_options(cfg));
    detail::write_report(dir, report, world, input);
    return report;
  } catch (const TrainingDivergence& e) {
    detail::write_report(dir, e.partial(), world, input);
    throw;
  }
}

/// Throws ConfigError unless `model` accepts the config's feature layout.
inline void check_snapshot_compatible(const ExperimentConfig& cfg, const NetworkParams& model) {
  const World probe = make_world(cfg);
  const ModelInput input = model_input(probe, feature_kind(cfg));
  if (model.input_dim() != input.values.cols())
    throw ConfigError("snapshot expects " + std::to_string(model.input_dim()) +
                      " input features but model.features '" + cfg.model.features + "' provides " +
                      std::to_string(input.values.cols()));
}

/// transfer.csv: one EVD per fresh world plus a mean row.
inline TransferResult cmd_eval(const ExperimentConfig& cfg, const std::string& snapshot_path) {
  validate_config(cfg);
  const NetworkParams model = load_snapshot(snapshot_path);
  check_snapshot_compatible(cfg, model);
  const auto dir = detail::prepare_output(cfg);
  const TransferResult result = transfer_for(cfg, model);
  detail::write_file((dir / "transfer.csv").string(), [&](std::ostream& os) {
    os << "world,evd\n";
    for (std::size_t i = 0; i < result.evd.size(); ++i)
      os << i << ',' << detail::format_double(result.evd[i]) << '\n';
    os << "mean," << detail::format_double(result.mean) << '\n';
  });
  return result;
}

struct BenchRow {
  std::size_t n_demos;
  double evd_train;
  double evd_transfer;
};

/// bench.csv: training and transfer EVD for each demonstration count.
inline std::vector<BenchRow> cmd_bench(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto dir = detail::prepare_output(cfg);
  std::vector<BenchRow> rows;
  for (std::size_t n : kBenchDemoCounts) {
    ExperimentConfig point = cfg;
    point.demos.n_demos = n;
    const ExperimentRun run = run_experiment(point);
    const RewardVector learned = predict_reward(run.report.params, model_input(run.world, feature_kind(point)));
    rows.push_back({n, expected_value_difference(run.world, learned),
                    transfer_for(point, run.report.params).mean});
  }
  detail::write_file((dir / "bench.csv").string(), [&](std::ostream& os) {
    os << "n_demos,evd_train,evd_transfer\n";
    for (const auto& r : rows)
      os << r.n_demos << ',' << detail::format_double(r.evd_train) << ','
         << detail::format_double(r.evd_transfer) << '\n';
  });
  return rows;
}

}  // namespace deepirl
