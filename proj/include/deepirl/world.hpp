#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "deepirl/demos.hpp"
#include "deepirl/errors.hpp"
#include "deepirl/matrix.hpp"
#include "deepirl/mdp.hpp"
#include "deepirl/network.hpp"
#include "deepirl/rng.hpp"
#include "deepirl/solver.hpp"

namespace deepirl {

enum class WorldKind { Objectworld, Binaryworld };

/// Which representation of a world's states is fed to a reward model.
enum class FeatureKind { Continuous, Discrete, Neighborhood, Raw };

inline constexpr double kDefaultDiscount = 0.9;

struct WorldObject {
  std::size_t row;
  std::size_t col;
  std::size_t color;

  bool operator==(const WorldObject&) const = default;
};

/// A benchmark instance: dynamics, layout, features and the hidden reward.
struct World {
  WorldKind kind;
  std::size_t size;        // M, the grid is M x M
  std::size_t colors = 0;  // C, Objectworld only
  std::uint64_t seed = 0;
  GridMdp mdp;

  std::vector<WorldObject> objects{};     // Objectworld
  std::vector<std::uint8_t> cell_colors{};  // Binaryworld, 1 = blue, row-major

  RewardVector true_reward{};
  Matrix features_continuous{};  // (state, C) distance to nearest object per color
  Matrix features_discrete{};    // (state, C*M) column c*M + d-1: distance_c <= d
  Matrix features_neighborhood{};  // (state, 9) blue indicators of the 3x3 block
  GridTensor raw_channels{};
};

/// Generator settings for fresh worlds of one kind.
struct WorldConfig {
  WorldKind kind = WorldKind::Objectworld;
  std::size_t size = 16;
  std::size_t colors = 2;
  std::size_t n_objects = 0;  // 0 selects default_object_count(size)
  double discount = kDefaultDiscount;
};

inline std::size_t default_object_count(std::size_t size) {
  const double m2 = static_cast<double>(size * size);
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(m2 / 40.0)));
}

// ---------------------------------------------------------------------------
// Objectworld

/// +1 within 3 of color 0 and within 2 of color 1, -1 within 3 of color 0 only.
inline double objectworld_reward(double dist_first, double dist_second) {
  if (dist_first <= 3.0) return dist_second <= 2.0 ? 1.0 : -1.0;
  return 0.0;
}

/// Builds an Objectworld from an explicit object layout.
inline World build_objectworld(std::size_t size, std::size_t colors,
                               std::vector<WorldObject> objects, std::uint64_t seed = 0,
                               double discount = kDefaultDiscount) {
  detail::require(size >= 1, "world size must be positive");
  detail::require(colors >= 2, "Objectworld needs at least two colors");
  const std::size_t n = size * size;
  std::vector<bool> occupied(n, false);
  for (const auto& obj : objects) {
    detail::require(obj.row < size && obj.col < size, "object outside the grid");
    detail::require(obj.color < colors, "object color out of range");
    detail::require(!occupied[obj.row * size + obj.col], "two objects share a cell");
    occupied[obj.row * size + obj.col] = true;
  }

  World w{.kind = WorldKind::Objectworld, .size = size, .colors = colors, .seed = seed,
          .mdp = make_gridworld(size, size, discount)};
  w.objects = std::move(objects);

  const double cap = static_cast<double>(size) * std::sqrt(2.0);
  w.features_continuous = Matrix(n, colors, cap);
  for (std::size_t s = 0; s < n; ++s) {
    const double r = static_cast<double>(s / size);
    const double c = static_cast<double>(s % size);
    for (const auto& obj : w.objects) {
      const double dr = r - static_cast<double>(obj.row);
      const double dc = c - static_cast<double>(obj.col);
      double& d = w.features_continuous(s, obj.color);
      d = std::min(d, std::sqrt(dr * dr + dc * dc));
    }
  }

  w.features_discrete = Matrix(n, colors * size, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t col = 0; col < colors; ++col)
      for (std::size_t d = 1; d <= size; ++d)
        w.features_discrete(s, col * size + d - 1) =
            w.features_continuous(s, col) <= static_cast<double>(d) ? 1.0 : 0.0;

  w.true_reward.resize(n);
  for (std::size_t s = 0; s < n; ++s)
    w.true_reward[s] = objectworld_reward(w.features_continuous(s, 0), w.features_continuous(s, 1));

  w.raw_channels = GridTensor{colors, size, size, std::vector<double>(colors * n, 0.0)};
  for (const auto& obj : w.objects) w.raw_channels.at(obj.color, obj.row, obj.col) = 1.0;
  return w;
}

/// Random Objectworld: objects on distinct uniform cells with uniform colors.
inline World generate_objectworld(std::size_t size, std::size_t colors, std::size_t n_objects,
                                  std::uint64_t seed, double discount = kDefaultDiscount) {
  detail::require(size >= 1, "world size must be positive");
  detail::require(colors >= 2, "Objectworld needs at least two colors");
  detail::require(n_objects >= 1 && n_objects <= size * size, "object count must lie in [1, M^2]");

  Rng rng(seed);
  const std::size_t n = size * size;
  const std::size_t budget = 64 * n + 64;
  std::vector<bool> occupied(n, false);
  std::vector<WorldObject> objects;
  for (std::size_t k = 0; k < n_objects; ++k) {
    std::size_t attempts = 0;
    std::size_t cell = rng.index(n);
    while (occupied[cell]) {
      if (++attempts > budget)
        throw GenerationError("could not place object " + std::to_string(k) + " without collision");
      cell = rng.index(n);
    }
    occupied[cell] = true;
    objects.push_back({cell / size, cell % size, rng.index(colors)});
  }
  return build_objectworld(size, colors, std::move(objects), seed, discount);
}

// ---------------------------------------------------------------------------
// Binaryworld

inline double binaryworld_reward(std::size_t blue_count) {
  if (blue_count == 4) return 1.0;
  if (blue_count == 5) return -1.0;
  return 0.0;
}

/// Builds a Binaryworld from explicit cell colors (1 = blue), row-major.
inline World build_binaryworld(std::size_t size, std::vector<std::uint8_t> cell_colors,
                               std::uint64_t seed = 0, double discount = kDefaultDiscount) {
  detail::require(size >= 1, "world size must be positive");
  const std::size_t n = size * size;
  detail::require(cell_colors.size() == n, "cell color grid has wrong size");
  for (auto c : cell_colors) detail::require(c <= 1, "cell colors must be 0 (red) or 1 (blue)");

  World w{.kind = WorldKind::Binaryworld, .size = size, .colors = 0, .seed = seed,
          .mdp = make_gridworld(size, size, discount)};
  w.cell_colors = std::move(cell_colors);

  w.features_neighborhood = Matrix(n, 9, 0.0);
  w.true_reward.resize(n);
  const auto isize = static_cast<long long>(size);
  for (std::size_t s = 0; s < n; ++s) {
    const auto r = static_cast<long long>(s / size);
    const auto c = static_cast<long long>(s % size);
    std::size_t blue = 0;
    std::size_t k = 0;
    for (long long dr = -1; dr <= 1; ++dr)
      for (long long dc = -1; dc <= 1; ++dc, ++k) {
        const long long rr = r + dr;
        const long long cc = c + dc;
        if (rr < 0 || cc < 0 || rr >= isize || cc >= isize) continue;
        if (w.cell_colors[static_cast<std::size_t>(rr * isize + cc)] == 1) {
          w.features_neighborhood(s, k) = 1.0;
          ++blue;
        }
      }
    w.true_reward[s] = binaryworld_reward(blue);
  }

  w.raw_channels = GridTensor{1, size, size, std::vector<double>(n, 0.0)};
  for (std::size_t s = 0; s < n; ++s) w.raw_channels.values[s] = w.cell_colors[s];
  return w;
}

/// Random Binaryworld: every cell independently blue with probability 1/2.
inline World generate_binaryworld(std::size_t size, std::uint64_t seed,
                                  double discount = kDefaultDiscount) {
  detail::require(size >= 1, "world size must be positive");
  Rng rng(seed);
  std::vector<std::uint8_t> colors(size * size);
  for (auto& c : colors) c = rng.bernoulli(0.5) ? 1 : 0;
  return build_binaryworld(size, std::move(colors), seed, discount);
}

inline World generate_world(const WorldConfig& cfg, std::uint64_t seed) {
  if (cfg.kind == WorldKind::Binaryworld) return generate_binaryworld(cfg.size, seed, cfg.discount);
  const std::size_t n_objects = cfg.n_objects == 0 ? default_object_count(cfg.size) : cfg.n_objects;
  return generate_objectworld(cfg.size, cfg.colors, n_objects, seed, cfg.discount);
}

inline bool feature_kind_supported(WorldKind world, FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Continuous:
    case FeatureKind::Discrete:
      return world == WorldKind::Objectworld;
    case FeatureKind::Neighborhood:
      return world == WorldKind::Binaryworld;
    case FeatureKind::Raw:
      return true;
  }
  return false;
}

/// Network input for the requested representation of the world's states.
inline ModelInput model_input(const World& w, FeatureKind kind) {
  if (!feature_kind_supported(w.kind, kind))
    throw InvalidArgument("feature kind is not available for this world kind");
  switch (kind) {
    case FeatureKind::Continuous:
      return to_model_input(w.features_continuous, w.size, w.size);
    case FeatureKind::Discrete:
      return to_model_input(w.features_discrete, w.size, w.size);
    case FeatureKind::Neighborhood:
      return to_model_input(w.features_neighborhood, w.size, w.size);
    case FeatureKind::Raw:
      return to_model_input(w.raw_channels);
  }
  throw InvalidArgument("unknown feature kind");
}

// ---------------------------------------------------------------------------
// Demonstrations

namespace detail {

inline std::size_t sample_index(Rng& rng, const std::vector<double>& probs) {
  double u = rng.uniform();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  // Rounding left u just past the total; fall back to the last positive entry.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

inline std::size_t sample_successor(Rng& rng, std::span<const Successor> row) {
  double u = rng.uniform();
  for (const auto& succ : row) {
    if (u < succ.prob) return succ.state;
    u -= succ.prob;
  }
  return row.back().state;
}

inline std::size_t greedy_action(const StochasticPolicy& policy, std::size_t s) {
  const auto& m = policy.action_probs;
  return static_cast<std::size_t>(std::max_element(m.row(s), m.row(s) + m.cols()) - m.row(s));
}

}  // namespace detail

inline constexpr double kHardSolveEpsilon = 1e-11;
inline constexpr double kEvaluationEpsilon = 1e-12;

/// Demonstrations from the optimal policy under `reward`, where every step
/// takes a uniformly random action with probability `random_action_prob`.
inline DemoSet sample_demonstrations(const GridMdp& mdp, const RewardVector& reward,
                                     std::size_t n_demos, std::size_t horizon,
                                     double random_action_prob, std::uint64_t seed) {
  detail::require(n_demos >= 1, "need at least one demonstration");
  detail::require(horizon >= 1, "demonstration length must be positive");
  detail::require(random_action_prob >= 0.0 && random_action_prob <= 1.0,
                  "random action probability must lie in [0,1]");

  const Solution optimal = hard_value_iteration(mdp, reward, kHardSolveEpsilon);
  Rng rng(seed);
  DemoSet demos{{}, horizon, mdp.n_states(), mdp.n_actions()};
  demos.trajectories.reserve(n_demos);
  for (std::size_t d = 0; d < n_demos; ++d) {
    Trajectory traj;
    traj.reserve(horizon);
    std::size_t s = detail::sample_index(rng, mdp.start_distribution());
    for (std::size_t t = 0; t < horizon; ++t) {
      const bool random = rng.bernoulli(random_action_prob);
      const std::size_t a =
          random ? rng.index(mdp.n_actions()) : detail::greedy_action(optimal.policy, s);
      traj.push_back({s, a});
      s = detail::sample_successor(rng, mdp.successors(s, a));
    }
    demos.trajectories.push_back(std::move(traj));
  }
  return demos;
}

inline DemoSet sample_demonstrations(const World& w, std::size_t n_demos, std::size_t horizon,
                                     double random_action_prob, std::uint64_t seed) {
  return sample_demonstrations(w.mdp, w.true_reward, n_demos, horizon, random_action_prob, seed);
}

// ---------------------------------------------------------------------------
// Expected value difference

/// Scores learned rewards by the value lost, under the true reward, when
/// acting optimally for the learned one. The optimal value is solved once.
class ValueDifference {
 public:
  ValueDifference(GridMdp mdp, RewardVector true_reward)
      : mdp_(std::move(mdp)), true_reward_(std::move(true_reward)) {
    detail::require(mdp_.discount() < 1.0, "expected value difference needs discount < 1");
    const Solution optimal = hard_value_iteration(mdp_, true_reward_, kHardSolveEpsilon);
    optimal_value_ = start_weighted(policy_value(mdp_, optimal.policy, true_reward_, kEvaluationEpsilon));
  }

  double operator()(const RewardVector& learned) const {
    const Solution chosen = hard_value_iteration(mdp_, learned, kHardSolveEpsilon);
    const double achieved =
        start_weighted(policy_value(mdp_, chosen.policy, true_reward_, kEvaluationEpsilon));
    const double diff = optimal_value_ - achieved;
    return diff < 0.0 && diff >= -1e-9 ? 0.0 : diff;
  }

  double optimal_value() const noexcept { return optimal_value_; }

 private:
  double start_weighted(const std::vector<double>& v) const {
    double acc = 0.0;
    for (std::size_t s = 0; s < v.size(); ++s) acc += mdp_.start_distribution()[s] * v[s];
    return acc;
  }

  GridMdp mdp_;
  RewardVector true_reward_;
  double optimal_value_ = 0.0;
};

inline double expected_value_difference(const GridMdp& mdp, const RewardVector& true_reward,
                                        const RewardVector& learned) {
  return ValueDifference(mdp, true_reward)(learned);
}

inline double expected_value_difference(const World& w, const RewardVector& learned) {
  return expected_value_difference(w.mdp, w.true_reward, learned);
}

struct TransferResult {
  std::vector<double> evd;
  double mean = 0.0;
};

/// Evaluates a frozen model on `n_worlds` fresh worlds; world i uses seed + i.
inline TransferResult transfer_evaluate(const NetworkParams& model, std::size_t n_worlds,
                                        const WorldConfig& cfg, FeatureKind features,
                                        std::uint64_t seed) {
  detail::require(n_worlds >= 1, "need at least one transfer world");
  if (!feature_kind_supported(cfg.kind, features))
    throw InvalidArgument("feature kind is not available for this world kind");
  TransferResult out;
  for (std::size_t i = 0; i < n_worlds; ++i) {
    const World w = generate_world(cfg, stream_seed(seed, i));
    const ModelInput in = model_input(w, features);
    if (in.values.cols() != model.input_dim())
      throw InvalidArgument("model expects " + std::to_string(model.input_dim()) +
                            " inputs but the world provides " + std::to_string(in.values.cols()));
    out.evd.push_back(expected_value_difference(w, forward(model, in)));
  }
  out.mean = std::accumulate(out.evd.begin(), out.evd.end(), 0.0) / static_cast<double>(n_worlds);
  return out;
}

}  // namespace deepirl
