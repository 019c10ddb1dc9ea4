#pragma once

#include <cstddef>
#include <vector>

#include "deepirl/errors.hpp"
#include "deepirl/matrix.hpp"
#include "deepirl/mdp.hpp"
#include "deepirl/solver.hpp"

namespace deepirl {

/// Fixed-length expert demonstrations over one MDP.
struct DemoSet {
  std::vector<Trajectory> trajectories;
  std::size_t horizon = 0;  // K, steps per trajectory
  std::size_t n_states = 0;
  std::size_t n_actions = 0;

  std::size_t size() const noexcept { return trajectories.size(); }
};

/// Empirical expert frequencies mu_D^a averaged per demonstration, and
/// mu_D = sum_a mu_D^a. Total mass equals the demonstration length.
inline VisitationCounts expert_counts(const DemoSet& demos) {
  if (demos.trajectories.empty()) throw InvalidArgument("expert_counts needs at least one demonstration");
  detail::require(demos.n_states > 0 && demos.n_actions > 0, "demo set has no state/action space");

  Matrix sa(demos.n_states, demos.n_actions, 0.0);
  for (const auto& traj : demos.trajectories)
    for (const auto& step : traj) {
      detail::require(step.state < demos.n_states && step.action < demos.n_actions,
                      "demonstration step out of range");
      sa(step.state, step.action) += 1.0;
    }
  const double scale = 1.0 / static_cast<double>(demos.trajectories.size());
  VisitationCounts out;
  out.state_counts.assign(demos.n_states, 0.0);
  for (std::size_t s = 0; s < demos.n_states; ++s)
    for (std::size_t a = 0; a < demos.n_actions; ++a) {
      sa(s, a) *= scale;
      out.state_counts[s] += sa(s, a);
    }
  out.state_action_counts = std::move(sa);
  return out;
}

/// Fraction of demonstrations starting in each state.
inline std::vector<double> empirical_start_distribution(const DemoSet& demos) {
  if (demos.trajectories.empty()) throw InvalidArgument("empty demonstration set");
  std::vector<double> start(demos.n_states, 0.0);
  for (const auto& traj : demos.trajectories) {
    detail::require(!traj.empty() && traj.front().state < demos.n_states, "bad demonstration start");
    start[traj.front().state] += 1.0;
  }
  for (double& p : start) p /= static_cast<double>(demos.trajectories.size());
  return start;
}

}  // namespace deepirl
