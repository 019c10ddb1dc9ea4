#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deepirl/errors.hpp"

namespace deepirl {

/// Grid actions. Up increases the row index, Right increases the column index.
enum class Action : std::size_t { Up = 0, Down = 1, Left = 2, Right = 3, Stay = 4 };

inline constexpr std::size_t kGridActions = 5;

inline const char* action_name(std::size_t a) {
  static constexpr const char* names[] = {"up", "down", "left", "right", "stay"};
  return a < kGridActions ? names[a] : "?";
}

struct Successor {
  std::size_t state;
  double prob;

  bool operator==(const Successor&) const = default;
};

/// Finite MDP with sparse transition rows, discount and start distribution.
///
/// Each (state, action) row lists its successors with strictly positive
/// probability, sorted by successor index. States of grid instances are laid
/// out row-major; height() and width() are zero for non-grid instances.
class GridMdp {
 public:
  GridMdp(std::size_t n_states, std::size_t n_actions,
          std::vector<std::vector<Successor>> rows, double discount,
          std::vector<double> start_distribution,
          std::optional<std::size_t> goal_state = std::nullopt,
          std::size_t height = 0, std::size_t width = 0)
      : n_states_(n_states),
        n_actions_(n_actions),
        rows_(std::move(rows)),
        discount_(discount),
        start_(std::move(start_distribution)),
        goal_(goal_state),
        height_(height),
        width_(width) {
    validate();
  }

  /// Builds an MDP from a dense (state, action, next_state) tensor.
  static GridMdp from_dense(std::size_t n_states, std::size_t n_actions,
                            const std::vector<double>& tensor, double discount,
                            std::vector<double> start_distribution,
                            std::optional<std::size_t> goal_state = std::nullopt) {
    detail::require(tensor.size() == n_states * n_actions * n_states,
                    "transition tensor has wrong size");
    std::vector<std::vector<Successor>> rows(n_states * n_actions);
    for (std::size_t s = 0; s < n_states; ++s)
      for (std::size_t a = 0; a < n_actions; ++a)
        for (std::size_t t = 0; t < n_states; ++t) {
          double p = tensor[(s * n_actions + a) * n_states + t];
          if (p < 0.0 || p > 1.0 || !std::isfinite(p))
            throw InvalidArgument("transition entry outside [0,1]");
          if (p > 0.0) rows[s * n_actions + a].push_back({t, p});
        }
    return GridMdp(n_states, n_actions, std::move(rows), discount,
                   std::move(start_distribution), goal_state);
  }

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  double discount() const noexcept { return discount_; }
  const std::optional<std::size_t>& goal_state() const noexcept { return goal_; }
  const std::vector<double>& start_distribution() const noexcept { return start_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  std::span<const Successor> successors(std::size_t s, std::size_t a) const {
    return rows_[s * n_actions_ + a];
  }

  /// T(s, a, next).
  double transition(std::size_t s, std::size_t a, std::size_t next) const {
    for (const auto& succ : successors(s, a))
      if (succ.state == next) return succ.prob;
    return 0.0;
  }

  GridMdp with_start_distribution(std::vector<double> start) const {
    GridMdp copy = *this;
    copy.start_ = std::move(start);
    copy.validate();
    return copy;
  }

  GridMdp with_discount(double discount) const {
    GridMdp copy = *this;
    copy.discount_ = discount;
    copy.validate();
    return copy;
  }

 private:
  void validate() {
    detail::require(n_states_ > 0, "MDP needs at least one state");
    detail::require(n_actions_ > 0, "MDP needs at least one action");
    detail::require(rows_.size() == n_states_ * n_actions_, "transition rows have wrong count");
    detail::require(discount_ >= 0.0 && discount_ <= 1.0, "discount must lie in [0,1]");
    detail::require(start_.size() == n_states_, "start distribution has wrong length");
    if (goal_) detail::require(*goal_ < n_states_, "goal state out of range");
    detail::require(height_ * width_ == 0 || height_ * width_ == n_states_,
                    "grid dimensions do not match state count");

    double start_mass = 0.0;
    for (double p : start_) {
      detail::require(p >= 0.0 && p <= 1.0, "start probability outside [0,1]");
      start_mass += p;
    }
    detail::require(std::abs(start_mass - 1.0) <= 1e-12, "start distribution does not sum to 1");

    for (auto& row : rows_) {
      std::sort(row.begin(), row.end(),
                [](const Successor& x, const Successor& y) { return x.state < y.state; });
      double mass = 0.0;
      for (std::size_t i = 0; i < row.size(); ++i) {
        detail::require(row[i].state < n_states_, "successor state out of range");
        detail::require(row[i].prob > 0.0 && row[i].prob <= 1.0,
                        "transition probability outside (0,1]");
        detail::require(i == 0 || row[i].state != row[i - 1].state, "duplicate successor");
        mass += row[i].prob;
      }
      detail::require(std::abs(mass - 1.0) <= 1e-12, "transition row does not sum to 1");
    }
  }

  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<std::vector<Successor>> rows_;
  double discount_;
  std::vector<double> start_;
  std::optional<std::size_t> goal_;
  std::size_t height_;
  std::size_t width_;
};

/// Cell reached by applying `action` to (row, col); off-grid moves stay put.
inline std::size_t grid_move(std::size_t height, std::size_t width, std::size_t state,
                             std::size_t action) {
  std::size_t row = state / width;
  std::size_t col = state % width;
  switch (static_cast<Action>(action)) {
    case Action::Up:
      if (row + 1 < height) ++row;
      break;
    case Action::Down:
      if (row > 0) --row;
      break;
    case Action::Left:
      if (col > 0) --col;
      break;
    case Action::Right:
      if (col + 1 < width) ++col;
      break;
    case Action::Stay:
      break;
  }
  return row * width + col;
}

/// Five-action grid world. With probability `wind` the intended action is
/// replaced by one drawn uniformly from all five actions.
inline GridMdp make_gridworld(std::size_t height, std::size_t width, double discount,
                              double wind = 0.0) {
  if (height == 0 || width == 0) throw InvalidArgument("grid dimensions must be positive");
  detail::require(wind >= 0.0 && wind <= 1.0, "wind must lie in [0,1]");
  const std::size_t n = height * width;

  std::vector<std::vector<Successor>> rows(n * kGridActions);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < kGridActions; ++a) {
      std::vector<double> mass(kGridActions, 0.0);
      std::vector<std::size_t> target(kGridActions);
      for (std::size_t effect = 0; effect < kGridActions; ++effect) {
        target[effect] = grid_move(height, width, s, effect);
        mass[effect] = wind / kGridActions + (effect == a ? 1.0 - wind : 0.0);
      }
      auto& row = rows[s * kGridActions + a];
      for (std::size_t effect = 0; effect < kGridActions; ++effect) {
        if (mass[effect] == 0.0) continue;
        auto it = std::find_if(row.begin(), row.end(),
                               [&](const Successor& x) { return x.state == target[effect]; });
        if (it == row.end())
          row.push_back({target[effect], mass[effect]});
        else
          it->prob += mass[effect];
      }
    }
  }
  std::vector<double> start(n, 1.0 / static_cast<double>(n));
  return GridMdp(n, kGridActions, std::move(rows), discount, std::move(start), std::nullopt,
                 height, width);
}

struct Step {
  std::size_t state;
  std::size_t action;

  bool operator==(const Step&) const = default;
};

using Trajectory = std::vector<Step>;

/// True iff every consecutive step is reachable under the MDP's dynamics.
inline bool validate_trajectory(const GridMdp& mdp, const Trajectory& traj) {
  for (const auto& step : traj) {
    if (step.state >= mdp.n_states())
      throw InvalidArgument("trajectory state " + std::to_string(step.state) + " out of range");
    if (step.action >= mdp.n_actions())
      throw InvalidArgument("trajectory action " + std::to_string(step.action) + " out of range");
  }
  if (traj.empty()) return false;
  for (std::size_t t = 0; t + 1 < traj.size(); ++t)
    if (mdp.transition(traj[t].state, traj[t].action, traj[t + 1].state) <= 0.0) return false;
  return true;
}

}  // namespace deepirl
