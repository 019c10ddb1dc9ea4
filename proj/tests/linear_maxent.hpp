// Standalone linear MaxEnt IRL: reward = F w, gradient F^T (mu_D - E[mu]) - lambda w,
// AdaGrad ascent. Written without the network code so the trainer's
// no-hidden-layer path can be checked against it.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "deepirl/demos.hpp"
#include "deepirl/matrix.hpp"
#include "deepirl/mdp.hpp"
#include "deepirl/solver.hpp"

namespace oracle {

struct LinearMaxEntOptions {
  std::size_t iters = 100;
  double lr = 0.1;
  double damping = 1e-8;
  double weight_decay = 1e-4;
  double stop_epsilon = 1e-4;
  double solver_epsilon = 1e-8;
  std::size_t solver_max_iters = 100'000;
};

inline std::vector<double> linear_maxent(const deepirl::GridMdp& mdp, const deepirl::Matrix& features,
                                         const deepirl::DemoSet& demos,
                                         const LinearMaxEntOptions& opt) {
  const std::size_t n = features.rows(), f = features.cols();

  // Expert frequencies and the demonstrations' start distribution.
  std::vector<double> mu_d(n, 0.0), start(n, 0.0);
  const double per_demo = 1.0 / static_cast<double>(demos.trajectories.size());
  for (const auto& traj : demos.trajectories) {
    start[traj.front().state] += 1.0;
    for (const auto& step : traj) mu_d[step.state] += 1.0;
  }
  for (std::size_t s = 0; s < n; ++s) {
    mu_d[s] *= per_demo;
    start[s] *= per_demo;
  }
  const deepirl::GridMdp rollout = mdp.with_start_distribution(start);

  std::vector<double> w(f, 0.0), acc(f, 0.0);
  for (std::size_t it = 0; it < opt.iters; ++it) {
    std::vector<double> r(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      double z = 0.0;
      for (std::size_t j = 0; j < f; ++j) z += w[j] * features(s, j);
      r[s] = z;
    }
    const auto soft = deepirl::soft_value_iteration(mdp, r, opt.solver_epsilon, opt.solver_max_iters);
    const auto expected = deepirl::propagate_policy(rollout, soft.policy, demos.horizon);

    std::vector<double> g(f, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double d = mu_d[s] - expected.state_counts[s];
      for (std::size_t j = 0; j < f; ++j) g[j] += d * features(s, j);
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      g[j] += -opt.weight_decay * w[j];
      norm = std::max(norm, std::abs(g[j]));
    }
    if (norm < opt.stop_epsilon) break;
    for (std::size_t j = 0; j < f; ++j) {
      acc[j] += g[j] * g[j];
      w[j] += opt.lr * g[j] / (std::sqrt(acc[j]) + opt.damping);
    }
  }
  return w;
}

}  // namespace oracle
