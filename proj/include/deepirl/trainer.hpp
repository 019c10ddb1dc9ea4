#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "deepirl/demos.hpp"
#include "deepirl/errors.hpp"
#include "deepirl/network.hpp"
#include "deepirl/solver.hpp"
#include "deepirl/world.hpp"

namespace deepirl {

/// sum_{s,a} mu_D^a(s,a) log pi(a|s). Returns -inf when expert mass falls on
/// an action the policy never takes.
inline double maxent_data_loss(const StochasticPolicy& policy, const VisitationCounts& expert) {
  if (!expert.state_action_counts) throw InvalidArgument("expert counts lack state-action detail");
  const Matrix& mu = *expert.state_action_counts;
  detail::require(mu.rows() == policy.action_probs.rows() && mu.cols() == policy.action_probs.cols(),
                  "policy and expert counts have different shapes");
  double loss = 0.0;
  for (std::size_t s = 0; s < mu.rows(); ++s)
    for (std::size_t a = 0; a < mu.cols(); ++a) {
      const double m = mu(s, a);
      if (m == 0.0) continue;
      const double p = policy(s, a);
      if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
      loss += m * std::log(p);
    }
  return loss;
}

/// dL_D/dr = mu_D - E[mu].
inline std::vector<double> data_gradient_wrt_reward(const VisitationCounts& expert,
                                                    const VisitationCounts& expected) {
  detail::require(expert.state_counts.size() == expected.state_counts.size(),
                  "visitation counts cover different state spaces");
  std::vector<double> g(expert.state_counts.size());
  for (std::size_t s = 0; s < g.size(); ++s) g[s] = expert.state_counts[s] - expected.state_counts[s];
  return g;
}

struct TrainOptions {
  std::size_t iters = 100;
  double epsilon = 1e-4;  // stop once the parameter gradient sup-norm drops below
  double weight_decay = 1e-4;
  double solver_epsilon = 1e-8;
  std::size_t solver_max_iters = 100'000;
  bool track_evd = true;
};

struct TrainRecord {
  std::size_t iteration;
  double loss;
  double grad_norm;
  double evd_train;  // NaN when not tracked
  bool degenerate;   // loss hit -inf
};

struct TrainReport {
  std::vector<TrainRecord> records;
  NetworkParams params;
};

/// Divergence inside the training loop, tagged with the failing iteration.
class TrainingDivergence : public NumericDivergence {
 public:
  TrainingDivergence(const NumericDivergence& cause, std::size_t iteration, TrainReport partial)
      : NumericDivergence("iteration " + std::to_string(iteration) + ": " + cause.what(), cause.state()),
        iteration_(iteration),
        partial_(std::move(partial)) {}

  std::size_t iteration() const noexcept { return iteration_; }
  const TrainReport& partial() const noexcept { return partial_; }

 private:
  std::size_t iteration_;
  TrainReport partial_;
};

/// Maximum entropy deep IRL.
///
/// Each iteration: forward the model, solve the soft MDP, propagate the policy
/// for the demonstration length from the demonstrations' own start states,
/// score the data loss, push mu_D - E[mu] through the network, add weight
/// decay and take an AdaGrad ascent step.
/// Stops early when the parameter gradient sup-norm falls below
/// `opts.epsilon`; that final iteration is recorded but not applied.
inline TrainReport train(const GridMdp& mdp, const ModelInput& input, const DemoSet& demos,
                         NetworkParams model, AdaGradState& opt, const TrainOptions& opts,
                         const ValueDifference* evd = nullptr) {
  detail::require(demos.n_states == mdp.n_states() && demos.n_actions == mdp.n_actions(),
                  "demonstrations do not match the MDP");
  detail::require(input.values.rows() == mdp.n_states(), "model input does not cover every state");
  detail::require(demos.horizon >= 1, "demonstrations need a positive length");
  validate_params(model);

  const VisitationCounts expert = expert_counts(demos);
  const GridMdp rollout = mdp.with_start_distribution(empirical_start_distribution(demos));
  TrainReport report;
  ForwardCache cache;
  for (std::size_t n = 1; n <= opts.iters; ++n) {
    try {
      const std::vector<double> reward = forward(model, input, cache);
      for (std::size_t s = 0; s < reward.size(); ++s)
        if (!std::isfinite(reward[s])) throw NumericDivergence("model produced a non-finite reward", s);
      const Solution soft = soft_value_iteration(mdp, reward, opts.solver_epsilon, opts.solver_max_iters);
      const VisitationCounts expected = propagate_policy(rollout, soft.policy, demos.horizon);

      const double loss = maxent_data_loss(soft.policy, expert);
      const std::vector<double> dr = data_gradient_wrt_reward(expert, expected);

      ParamBlocks grads = backward(model, cache, dr);
      apply_weight_decay(grads, model, opts.weight_decay);
      const double grad_norm = sup_norm(grads);
      const double evd_now =
          opts.track_evd && evd ? (*evd)(reward) : std::numeric_limits<double>::quiet_NaN();
      report.records.push_back({n, loss, grad_norm, evd_now, std::isinf(loss)});
      if (grad_norm < opts.epsilon) break;
      adagrad_update(model, grads, opt);
    } catch (const NumericDivergence& e) {
      report.params = model;
      throw TrainingDivergence(e, n, std::move(report));
    }
  }
  report.params = std::move(model);
  return report;
}

inline TrainReport train(const World& world, const DemoSet& demos, FeatureKind features,
                         NetworkParams model, AdaGradState& opt, const TrainOptions& opts) {
  std::optional<ValueDifference> evd;
  if (opts.track_evd) evd.emplace(world.mdp, world.true_reward);
  return train(world.mdp, model_input(world, features), demos, std::move(model), opt, opts,
               evd ? &*evd : nullptr);
}

/// Rewards for every state from a trained model: one forward pass.
inline std::vector<double> predict_reward(const NetworkParams& model, const ModelInput& input) {
  return forward(model, input);
}

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_report_csv(std::ostream& os, const TrainReport& report) {
  os << "iter,loss,grad_norm,evd_train\n";
  for (const auto& r : report.records)
    os << r.iteration << ',' << detail::format_double(r.loss) << ','
       << detail::format_double(r.grad_norm) << ',' << detail::format_double(r.evd_train) << '\n';
}

}  // namespace deepirl
