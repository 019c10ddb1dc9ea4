#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "deepirl/errors.hpp"
#include "deepirl/matrix.hpp"
#include "deepirl/mdp.hpp"

namespace deepirl {

/// Per-state reward r(s); rewards do not depend on the action.
using RewardVector = std::vector<double>;

/// Stand-in for minus infinity in soft value iteration. exp(sentinel - finite)
/// underflows to exactly zero, so no inf - inf arithmetic ever occurs.
inline constexpr double kNegativeSentinel = -1e20;

struct StochasticPolicy {
  Matrix action_probs;  // (state, action)

  double operator()(std::size_t s, std::size_t a) const { return action_probs(s, a); }
};

struct ValueFunctions {
  std::vector<double> v;
  Matrix q;  // (state, action)
};

struct VisitationCounts {
  std::vector<double> state_counts;
  std::optional<Matrix> state_action_counts;
};

struct Solution {
  ValueFunctions values;
  StochasticPolicy policy;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline void check_reward(const GridMdp& mdp, const RewardVector& reward) {
  require(reward.size() == mdp.n_states(), "reward length does not match state count");
  for (double r : reward) require(std::isfinite(r), "reward entries must be finite");
}

inline void check_policy(const GridMdp& mdp, const StochasticPolicy& policy) {
  require(policy.action_probs.rows() == mdp.n_states() &&
              policy.action_probs.cols() == mdp.n_actions(),
          "policy shape does not match MDP");
}

/// E_{T(s,a,.)}[V].
inline double expected_next(const GridMdp& mdp, std::size_t s, std::size_t a,
                            const std::vector<double>& v) {
  double acc = 0.0;
  for (const auto& succ : mdp.successors(s, a)) acc += succ.prob * v[succ.state];
  return acc;
}

/// log sum exp over one row, with max subtraction.
inline double log_sum_exp(const double* x, std::size_t n) {
  double m = *std::max_element(x, x + n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::exp(x[i] - m);
  return m + std::log(acc);
}

inline double sup_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace detail

/// Maximum-entropy (soft) value iteration.
///
/// Q(s,a) = r(s) + gamma * E[V(s')], V(s) = log sum_a exp Q(s,a), starting
/// from V = -inf. A goal state, when present, has V(goal) = 0 re-imposed
/// before every sweep. Stops when the sup-norm change drops below `epsilon`
/// or after `max_iters` sweeps. The policy is pi(a|s) = exp(Q(s,a) - V(s)).
///
/// Throws NumericDivergence when values become non-finite, or when an
/// undiscounted goal-free problem fails to settle within `max_iters`.
inline Solution soft_value_iteration(const GridMdp& mdp, const RewardVector& reward,
                                     double epsilon, std::size_t max_iters) {
  detail::check_reward(mdp, reward);
  detail::require(epsilon > 0.0, "epsilon must be positive");
  detail::require(max_iters > 0, "max_iters must be positive");

  const std::size_t n = mdp.n_states();
  const std::size_t na = mdp.n_actions();
  const double gamma = mdp.discount();
  const auto& goal = mdp.goal_state();

  Solution out;
  std::vector<double> v(n, kNegativeSentinel);
  std::vector<double> next(n);
  Matrix q(n, na);

  for (std::size_t it = 0; it < max_iters; ++it) {
    // v holds V_t; the goal reset only applies to the backup.
    const double held = goal ? v[*goal] : 0.0;
    if (goal) v[*goal] = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      double* qs = q.row(s);
      for (std::size_t a = 0; a < na; ++a)
        qs[a] = reward[s] + gamma * detail::expected_next(mdp, s, a, v);
      next[s] = detail::log_sum_exp(qs, na);
      if (!std::isfinite(next[s]))
        throw NumericDivergence(
            "soft value iteration diverged at state " + std::to_string(s), s);
    }
    if (goal) v[*goal] = held;
    const double delta = detail::sup_norm_diff(next, v);
    v.swap(next);
    ++out.iterations;
    if (delta < epsilon) {
      out.converged = true;
      break;
    }
  }

  if (!out.converged && gamma >= 1.0 && !goal) {
    std::size_t worst = 0;
    for (std::size_t s = 0; s < n; ++s)
      if (std::abs(v[s] - next[s]) > std::abs(v[worst] - next[worst])) worst = s;
    throw NumericDivergence("undiscounted soft value iteration without goal did not settle at state " +
                                std::to_string(worst),
                            worst);
  }

  // Undiscounted and goal-free: values still in the sentinel range have
  // absorbed unbounded growth and never became finite.
  if (!goal && gamma >= 1.0)
    for (std::size_t s = 0; s < n; ++s)
      if (v[s] <= 0.5 * kNegativeSentinel)
        throw NumericDivergence("soft values never became finite at state " + std::to_string(s), s);

  Matrix pi(n, na);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t a = 0; a < na; ++a) pi(s, a) = std::exp(q(s, a) - v[s]);

  out.values.v = std::move(v);
  out.values.q = std::move(q);
  out.policy.action_probs = std::move(pi);
  return out;
}

/// Bellman-optimal value iteration with a deterministic greedy policy.
///
/// Ties (within 1e-9 relative) go to the lowest action index.
inline Solution hard_value_iteration(const GridMdp& mdp, const RewardVector& reward,
                                     double epsilon, std::size_t max_iters = 1'000'000) {
  detail::check_reward(mdp, reward);
  detail::require(epsilon > 0.0, "epsilon must be positive");
  detail::require(mdp.discount() < 1.0 || mdp.goal_state().has_value(),
                  "hard value iteration needs discount < 1 or a goal state");

  const std::size_t n = mdp.n_states();
  const std::size_t na = mdp.n_actions();
  const double gamma = mdp.discount();
  const auto& goal = mdp.goal_state();

  Solution out;
  std::vector<double> v(n, 0.0);
  std::vector<double> next(n);
  Matrix q(n, na);

  for (std::size_t it = 0; it < max_iters; ++it) {
    if (goal) v[*goal] = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      double* qs = q.row(s);
      for (std::size_t a = 0; a < na; ++a)
        qs[a] = reward[s] + gamma * detail::expected_next(mdp, s, a, v);
      next[s] = *std::max_element(qs, qs + na);
      if (!std::isfinite(next[s]))
        throw NumericDivergence("value iteration diverged at state " + std::to_string(s), s);
    }
    if (goal) next[*goal] = 0.0;
    double delta = detail::sup_norm_diff(next, v);
    v.swap(next);
    ++out.iterations;
    if (delta < epsilon) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    std::size_t worst = 0;
    for (std::size_t s = 0; s < n; ++s)
      if (std::abs(v[s] - next[s]) > std::abs(v[worst] - next[worst])) worst = s;
    throw NumericDivergence("value iteration did not settle at state " + std::to_string(worst),
                            worst);
  }

  Matrix pi(n, na, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double* qs = q.row(s);
    double best = *std::max_element(qs, qs + na);
    double tol = 1e-9 * std::max(1.0, std::abs(best));
    for (std::size_t a = 0; a < na; ++a) {
      if (qs[a] >= best - tol) {
        pi(s, a) = 1.0;
        break;
      }
    }
  }

  out.values.v = std::move(v);
  out.values.q = std::move(q);
  out.policy.action_probs = std::move(pi);
  return out;
}

/// Expected state and state-action visitation over `horizon` steps.
///
/// E_1 is the start distribution; the goal's mass (if any) is zeroed before
/// each step is counted and propagated. Returns sum_{i=1..horizon} E_i.
inline VisitationCounts propagate_policy(const GridMdp& mdp, const StochasticPolicy& policy,
                                         std::size_t horizon) {
  detail::check_policy(mdp, policy);
  detail::require(horizon >= 1, "horizon must be at least 1");

  const std::size_t n = mdp.n_states();
  const std::size_t na = mdp.n_actions();
  const auto& goal = mdp.goal_state();

  std::vector<double> current = mdp.start_distribution();
  std::vector<double> next(n);
  VisitationCounts out;
  out.state_counts.assign(n, 0.0);
  Matrix sa(n, na, 0.0);

  for (std::size_t i = 0; i < horizon; ++i) {
    if (goal) current[*goal] = 0.0;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double mass = current[s];
      out.state_counts[s] += mass;
      if (mass == 0.0) continue;
      for (std::size_t a = 0; a < na; ++a) {
        const double flow = mass * policy(s, a);
        sa(s, a) += flow;
        if (flow == 0.0) continue;
        for (const auto& succ : mdp.successors(s, a)) next[succ.state] += flow * succ.prob;
      }
    }
    current.swap(next);
  }
  out.state_action_counts = std::move(sa);
  return out;
}

/// V^pi under `reward`: fixed point of V = sum_a pi(a|s) (r(s) + gamma E[V(s')]).
inline std::vector<double> policy_value(const GridMdp& mdp, const StochasticPolicy& policy,
                                        const RewardVector& reward, double epsilon,
                                        std::size_t max_iters = 1'000'000) {
  detail::check_reward(mdp, reward);
  detail::check_policy(mdp, policy);
  detail::require(epsilon > 0.0, "epsilon must be positive");
  detail::require(mdp.discount() < 1.0, "policy evaluation needs discount < 1");

  const std::size_t n = mdp.n_states();
  const std::size_t na = mdp.n_actions();
  const double gamma = mdp.discount();

  std::vector<double> v(n, 0.0);
  std::vector<double> next(n);
  for (std::size_t it = 0; it < max_iters; ++it) {
    for (std::size_t s = 0; s < n; ++s) {
      double acc = 0.0;
      for (std::size_t a = 0; a < na; ++a) {
        const double p = policy(s, a);
        if (p == 0.0) continue;
        acc += p * detail::expected_next(mdp, s, a, v);
      }
      next[s] = reward[s] + gamma * acc;
    }
    double delta = detail::sup_norm_diff(next, v);
    v.swap(next);
    if (delta < epsilon) break;
  }
  return v;
}

}  // namespace deepirl
