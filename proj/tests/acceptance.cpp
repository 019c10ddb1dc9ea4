// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// Benchmark criteria (5-7) run the library's experiment pipeline with its
// default hyperparameters: 100 AdaGrad iterations at lr 0.1, weight decay
// 1e-4, K = 8 step demonstrations with 30% random actions, MLP widths 32-32,
// conv 16 channels. World seeds 1..5.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "deepirl/experiment.hpp"
#include "gradcheck.hpp"
#include "linear_maxent.hpp"
#include "oracles.hpp"

namespace {

using namespace deepirl;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kBenchSeeds[] = {1, 2, 3, 4, 5};

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// 1. Analytic gradients against central differences

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t checks = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(1000 + seed);
    const std::size_t h = 1 + rng.index(5), w = 1 + rng.index(5);

    const std::size_t features = 1 + rng.index(6);
    std::vector<std::size_t> widths(1 + rng.index(2));
    for (auto& x : widths) x = 2 + rng.index(9);
    const auto dense = gradcheck::random_params(mlp_architecture(features, widths), seed);
    const auto dense_in = gradcheck::kink_free_input(rng, dense, h, w, features);

    const std::size_t channels = 1 + rng.index(3);
    const auto conv = gradcheck::random_params(
        conv_architecture(channels, 1 + rng.index(4), {2 + rng.index(6)}), seed + 7919);
    const auto conv_in = gradcheck::kink_free_input(rng, conv, h, w, channels);

    std::vector<double> e(h * w);
    for (double& x : e) x = rng.uniform(-1.0, 1.0);
    worst = std::max(worst, gradcheck::max_relative_error(dense, dense_in, e, 1e-5));
    worst = std::max(worst, gradcheck::max_relative_error(conv, conv_in, e, 1e-5));
    checks += 2;
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 30.0,
          fmt("max relative error %.3g over %zu networks (limit 1e-4), %.1f s (limit 30 s)", worst,
              checks, secs)};
}

// ---------------------------------------------------------------------------
// 2. Policy propagation against exhaustive enumeration

Outcome visitation_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t n = 1; n <= 5; ++n)
    for (std::size_t na = 1; na <= 5; ++na)
      for (std::size_t horizon = 1; horizon <= 6; ++horizon)
        for (int with_goal = 0; with_goal <= (n > 1 ? 1 : 0); ++with_goal) {
          Rng rng(n * 1000 + na * 100 + horizon * 10 + static_cast<std::size_t>(with_goal));
          GridMdp mdp = oracle::random_mdp(rng, n, na, 0.9);
          if (with_goal) {
            mdp = GridMdp::from_dense(n, na, oracle::dense_transitions(mdp), 0.9,
                                      mdp.start_distribution(), n - 1);
          }
          const Matrix pi = oracle::random_policy(rng, n, na);
          const auto got = propagate_policy(mdp, {pi}, horizon);
          const auto want = oracle::enumerate_visitation(mdp, pi, horizon);
          for (std::size_t s = 0; s < n; ++s) {
            worst = std::max(worst, std::abs(got.state_counts[s] - want.states[s]));
            for (std::size_t a = 0; a < na; ++a)
              worst = std::max(worst, std::abs((*got.state_action_counts)(s, a) - want.state_actions(s, a)));
          }
          ++cases;
        }
  const double secs = seconds_since(t0);
  return {worst < 1e-9 && secs < 10.0,
          fmt("max abs diff %.3g over %zu MDPs (limit 1e-9), %.1f s (limit 10 s)", worst, cases, secs)};
}

// ---------------------------------------------------------------------------
// 3. Horizon-limited soft backup against trajectory weighting

Outcome maxent_consistency() {
  double worst = 0.0;
  const std::size_t n = 4, goal = 3;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng(300 + trial);
    const std::size_t na = 2 + rng.index(3);
    const std::size_t horizon = 2 + rng.index(6);
    std::vector<double> t(n * na * n, 0.0);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t a = 0; a < na; ++a) {
        const std::size_t x = (a == 0 && s != goal) ? s + 1 : rng.index(n);
        t[(s * na + a) * n + x] = 1.0;
      }
    const GridMdp mdp = GridMdp::from_dense(n, na, t, 1.0, {1.0, 0.0, 0.0, 0.0}, goal);
    std::vector<double> r(n);
    for (double& x : r) x = rng.uniform(-1.0, 0.5);
    const Solution sol = soft_value_iteration(mdp, r, 1e-300, horizon);
    const Matrix want = oracle::maxent_action_marginals(mdp, r, horizon);
    for (std::size_t s = 0; s < n; ++s)
      if (s != goal)
        for (std::size_t a = 0; a < na; ++a) worst = std::max(worst, std::abs(sol.policy(s, a) - want(s, a)));
  }
  return {worst < 1e-6, fmt("max abs diff %.3g over 20 goal MDPs (limit 1e-6)", worst)};
}

// ---------------------------------------------------------------------------
// 4. No-hidden-layer training equals standalone linear MaxEnt

Outcome linear_reduction() {
  double worst = 0.0;
  for (std::uint64_t seed : kBenchSeeds) {
    ExperimentConfig cfg;
    cfg.world.seed = seed;
    cfg.model.kind = "linear";
    const ExperimentRun run = run_experiment(cfg);

    oracle::LinearMaxEntOptions lo;
    lo.iters = cfg.run.iters;
    lo.lr = cfg.optimizer.lr;
    lo.damping = cfg.optimizer.damping;
    lo.weight_decay = cfg.optimizer.weight_decay;
    lo.stop_epsilon = cfg.run.epsilon;
    const auto w = oracle::linear_maxent(run.world.mdp, run.world.features_continuous, run.demos, lo);
    const auto& got = run.report.params.layers.at(0).weights;
    for (std::size_t j = 0; j < w.size(); ++j)
      worst = std::max(worst, std::abs(got[j] - w[j]) / std::max(1.0, std::abs(w[j])));
  }
  return {worst <= 1e-12,
          fmt("max relative parameter diff %.3g over %zu seeds (limit 1e-12)", worst, std::size(kBenchSeeds))};
}

// ---------------------------------------------------------------------------
// Benchmarks shared by 5-8

struct BenchPoint {
  double evd_train;
  double evd_transfer;
  double label_accuracy;
  RewardVector learned;
  std::optional<World> world;
};

BenchPoint bench_point(ExperimentConfig cfg, bool with_transfer) {
  const ExperimentRun run = run_experiment(cfg);
  BenchPoint p;
  p.learned = predict_reward(run.report.params, model_input(run.world, feature_kind(cfg)));
  p.evd_train = expected_value_difference(run.world, p.learned);
  p.evd_transfer = with_transfer ? transfer_for(cfg, run.report.params).mean : 0.0;

  // Min-max scale onto the true range [-1, 1], threshold at +-0.5.
  const auto [lo, hi] = std::minmax_element(p.learned.begin(), p.learned.end());
  std::size_t correct = 0;
  for (std::size_t s = 0; s < p.learned.size(); ++s) {
    const double x = *hi > *lo ? -1.0 + 2.0 * (p.learned[s] - *lo) / (*hi - *lo) : 0.0;
    const double label = x > 0.5 ? 1.0 : x < -0.5 ? -1.0 : 0.0;
    correct += label == run.world.true_reward[s];
  }
  p.label_accuracy = static_cast<double>(correct) / static_cast<double>(p.learned.size());
  p.world = run.world;
  return p;
}

ExperimentConfig objectworld_cfg(std::uint64_t seed, const char* model) {
  ExperimentConfig cfg;
  cfg.world.kind = "objectworld";
  cfg.world.M = 16;
  cfg.world.C = 2;
  cfg.world.seed = seed;
  cfg.demos.n_demos = 64;
  cfg.model.kind = model;
  cfg.model.features = "continuous";
  cfg.run.n_transfer_worlds = 10;
  return cfg;
}

ExperimentConfig binaryworld_cfg(std::uint64_t seed, const char* model, const char* features) {
  ExperimentConfig cfg;
  cfg.world.kind = "binaryworld";
  cfg.world.M = 16;
  cfg.world.seed = seed;
  cfg.demos.n_demos = 128;
  cfg.model.kind = model;
  cfg.model.features = features;
  cfg.run.n_transfer_worlds = 10;
  return cfg;
}

std::vector<RewardVector> g_learned;  // learned rewards reused by the affine check
std::vector<World> g_worlds;

Outcome objectworld_ordering() {
  const auto t0 = Clock::now();
  std::vector<double> lin_train, deep_train, lin_transfer, deep_transfer;
  for (std::uint64_t seed : kBenchSeeds) {
    const BenchPoint lin = bench_point(objectworld_cfg(seed, "linear"), true);
    const BenchPoint deep = bench_point(objectworld_cfg(seed, "mlp"), true);
    lin_train.push_back(lin.evd_train);
    deep_train.push_back(deep.evd_train);
    lin_transfer.push_back(lin.evd_transfer);
    deep_transfer.push_back(deep.evd_transfer);
    g_learned.push_back(deep.learned);
    g_worlds.push_back(*deep.world);
  }
  const double lt = mean(lin_train), dt = mean(deep_train);
  const double lx = mean(lin_transfer), dx = mean(deep_transfer);
  const double secs = seconds_since(t0);
  return {dt <= 0.75 * lt && dx < lx && secs < 300.0,
          fmt("train EVD deep %.3f vs linear %.3f (need <= 75%%: %.0f%%); transfer deep %.3f vs "
              "linear %.3f; %.0f s (limit 300 s)",
              dt, lt, 100.0 * dt / lt, dx, lx, secs)};
}

std::vector<double> g_binary_mlp_evd;

Outcome binaryworld_ordering() {
  std::vector<double> lin_train, deep_train, accuracy;
  for (std::uint64_t seed : kBenchSeeds) {
    const BenchPoint lin = bench_point(binaryworld_cfg(seed, "linear", "neighborhood"), false);
    const BenchPoint deep = bench_point(binaryworld_cfg(seed, "mlp", "neighborhood"), false);
    lin_train.push_back(lin.evd_train);
    deep_train.push_back(deep.evd_train);
    accuracy.push_back(deep.label_accuracy);
    g_learned.push_back(deep.learned);
    g_worlds.push_back(*deep.world);
  }
  g_binary_mlp_evd = deep_train;
  const double lt = mean(lin_train), dt = mean(deep_train);
  const double worst_acc = *std::min_element(accuracy.begin(), accuracy.end());
  const bool ordering = dt < 0.5 * lt;
  const bool labels = worst_acc >= 0.9;
  return {ordering && labels,
          fmt("train EVD deep %.3f vs linear %.3f (need < 50%%: %.0f%%, %s); label accuracy "
              "mean %.3f min %.3f (need >= 0.900, %s)",
              dt, lt, 100.0 * dt / lt, ordering ? "ok" : "not met", mean(accuracy), worst_acc,
              labels ? "ok" : "not met")};
}

Outcome spatial_features() {
  std::vector<double> conv;
  for (std::uint64_t seed : kBenchSeeds)
    conv.push_back(bench_point(binaryworld_cfg(seed, "conv", "raw"), false).evd_train);
  const double c = mean(conv), m = mean(g_binary_mlp_evd);
  return {c <= 2.0 * m, fmt("conv on raw channels EVD %.3f vs handcrafted-feature MLP %.3f at N=128 "
                            "(need <= 2x: %.2fx)",
                            c, m, c / m)};
}

// ---------------------------------------------------------------------------
// 8. EVD zero at the truth and invariant under positive affine maps

Outcome evd_invariance() {
  bool exact_zero = true;
  for (std::uint64_t seed : kBenchSeeds) {
    for (const World& w : {make_world(objectworld_cfg(seed, "mlp")),
                           make_world(binaryworld_cfg(seed, "mlp", "neighborhood"))})
      exact_zero = exact_zero && expected_value_difference(w, w.true_reward) == 0.0;
  }
  double worst = 0.0;
  Rng rng(88);
  const std::pair<double, double> maps[] = {{2.0, 7.0}, {0.5, -3.0}, {10.0, 0.0}, {1.0, 100.0}};
  for (std::size_t i = 0; i < g_learned.size(); ++i) {
    const ValueDifference evd(g_worlds[i].mdp, g_worlds[i].true_reward);
    RewardVector noise(g_learned[i].size());
    for (double& x : noise) x = rng.uniform(-1.0, 1.0);
    for (const RewardVector& base : {g_learned[i], noise}) {
      const double ref = evd(base);
      for (const auto& [scale, shift] : maps) {
        RewardVector mapped(base);
        for (double& x : mapped) x = scale * x + shift;
        worst = std::max(worst, std::abs(evd(mapped) - ref));
      }
    }
  }
  return {exact_zero && worst <= 1e-9,
          fmt("true-reward EVD exactly 0: %s; max affine deviation %.3g over %zu rewards (limit 1e-9)",
              exact_zero ? "yes" : "no", worst, 2 * g_learned.size())};
}

// ---------------------------------------------------------------------------
// 9. train is byte-deterministic through the command-line tool

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome train_determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "deepirl_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  ExperimentConfig obj = objectworld_cfg(1, "mlp");
  obj.run.iters = 30;
  ExperimentConfig conv = binaryworld_cfg(2, "conv", "raw");
  conv.run.iters = 10;

  bool same = true;
  std::string detail;
  int idx = 0;
  for (ExperimentConfig cfg : {obj, conv}) {
    const fs::path cfg_path = root / ("config" + std::to_string(idx++) + ".json");
    std::ofstream(cfg_path) << config_to_json(cfg).dump(2);
    for (const char* run : {"a", "b"}) {
      const std::string cmd = std::string(DEEPIRL_CLI_PATH) + " train -c " + cfg_path.string() +
                              " -o " + (root / cfg_path.stem() / run).string() + " >/dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        same = false;
        detail += " run failed;";
      }
    }
    for (const char* f : {"report.csv", "model.bin"}) {
      const std::string a = slurp(root / cfg_path.stem() / "a" / f);
      const std::string b = slurp(root / cfg_path.stem() / "b" / f);
      if (a.empty() || a != b) {
        same = false;
        detail += " " + cfg.model.kind + "/" + f + " differs;";
      }
    }
  }
  fs::remove_all(root);
  return {same, same ? "report.csv and model.bin byte-identical across reruns (mlp objectworld, conv "
                       "binaryworld)"
                     : "mismatch:" + detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"gradient oracle", gradient_oracle},
      {"visitation oracle", visitation_oracle},
      {"maxent consistency", maxent_consistency},
      {"linear reduction", linear_reduction},
      {"objectworld ordering", objectworld_ordering},
      {"binaryworld ordering", binaryworld_ordering},
      {"spatial feature learning", spatial_features},
      {"value difference invariance", evd_invariance},
      {"train determinism", train_determinism},
  };
  int failures = 0;
  int index = 1;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index++, c.name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
