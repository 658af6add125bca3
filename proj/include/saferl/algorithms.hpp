#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "saferl/constraints.hpp"
#include "saferl/evaluation.hpp"
#include "saferl/lagrangian.hpp"
#include "saferl/mdp_core.hpp"
#include "saferl/trace.hpp"

namespace saferl {

struct TrainConfig {
  TaskMode mode = TaskMode::Continuing;
  double gamma = 0.95;
  std::int64_t episodic_horizon = 0;  // T, episodic mode only
  double eta_theta = 0.1;
  double eta_lambda = 0.05;
  std::int64_t iterations = 1;
  std::int64_t inner_iterations = 500;  // dual descent only
  std::uint64_t seed = 0;
  GradientVariant variant = GradientVariant::Paper;
  std::int64_t eval_cadence = 4000;
  std::int64_t eval_rollouts = 500;
  std::int64_t eval_horizon = 100;
  std::int64_t batch_size = 1;
  std::int64_t horizon_cap = -1;  // -1: 10*gamma/(1-gamma)
  std::optional<double> fixed_lambda;  // freeze multipliers, disable dual updates
  std::optional<double> baseline;      // constant subtracted from returns in the gradient
  bool step_decay = false;             // eta / sqrt(k+1) schedules
  int threads = 1;

  void validate() const;
};

// Divergence carries the iteration so a partial trace can be interpreted.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::int64_t iteration, const std::string& what)
      : std::runtime_error("training diverged at iteration " + std::to_string(iteration) + ": " +
                           what),
        iteration(iteration) {}
  std::int64_t iteration;
};

// Projected dual step: lambda' = [lambda - eta (u_hat - c)]_+ componentwise.
// Violated constraints (u_hat < c) push their multiplier up.
Eigen::VectorXd dual_update(const Eigen::VectorXd& lambda, const Eigen::VectorXd& u_hat,
                            const Eigen::VectorXd& c, double eta_lambda);

// Plain ascent step theta' = theta + eta * gradient.
template <typename Params>
Params primal_update(const Params& theta, const Params& gradient, double eta_theta) {
  if (theta.rows() != gradient.rows() || theta.cols() != gradient.cols())
    throw std::invalid_argument("primal_update: parameter/gradient shape mismatch");
  return theta + eta_theta * gradient;
}

template <typename P>
struct TrainResult {
  P policy;
  Multipliers multipliers;
  std::uint64_t horizon_truncations = 0;
};

namespace detail {

template <typename Params>
void check_finite_params(const Params& params, const Eigen::VectorXd& lambda,
                         std::int64_t iteration) {
  if (!params.allFinite()) throw TrainingDiverged(iteration, "non-finite policy parameters");
  if (!lambda.allFinite()) throw TrainingDiverged(iteration, "non-finite multipliers");
}

inline std::int64_t resolve_horizon_cap(const TrainConfig& cfg) {
  return cfg.horizon_cap >= 0 ? cfg.horizon_cap : HorizonSampler::default_cap(cfg.gamma);
}

// Draws the horizon for one rollout according to the task mode.
inline std::int64_t draw_horizon(const TrainConfig& cfg, HorizonSampler& sampler,
                                 std::uint64_t iteration, std::uint64_t index) {
  if (cfg.mode == TaskMode::Episodic) return cfg.episodic_horizon;
  auto g = rng::make_engine(cfg.seed, "horizon", iteration, index);
  return sampler.sample(g);
}

template <Environment E, typename P, Environment EvalE>
void run_eval_block(const E& train_env, const EvalE* eval_env, const P& policy,
                    const TrainConfig& cfg, std::int64_t iteration, TraceSink& sink) {
  SafetyReport report;
  const std::uint64_t eval_seed = rng::substream_key(cfg.seed, "eval", static_cast<std::uint64_t>(iteration));
  if (eval_env != nullptr)
    report = estimate_joint_safety(*eval_env, policy, static_cast<std::size_t>(cfg.eval_horizon),
                                   static_cast<std::size_t>(cfg.eval_rollouts), eval_seed,
                                   cfg.threads);
  else
    report = estimate_joint_safety(train_env, policy, static_cast<std::size_t>(cfg.eval_horizon),
                                   static_cast<std::size_t>(cfg.eval_rollouts), eval_seed,
                                   cfg.threads);
  EvalRecord record;
  record.iteration = iteration;
  record.safety_mean = report.joint_safety;
  record.safety_sd = report.joint_safety_sd;
  record.reward_per_step_mean = report.reward_per_step_mean;
  record.reward_per_step_sd = report.reward_per_step_sd;
  sink.on_eval(record);
}

}  // namespace detail

// Stochastic primal-dual: per iteration, a batch of trajectories under the
// current policy yields the score-function gradient estimate and the
// constraint estimate; theta ascends, lambda takes a projected descent step
// (skipped when the multipliers are frozen). Evaluation blocks run every
// eval_cadence iterations and after the final one.
template <Environment E, typename P, Environment EvalE = E>
  requires DifferentiablePolicyFor<P, typename E::State, typename E::Action>
TrainResult<P> run_stochastic_primal_dual(
    const E& env, P policy, const std::vector<ConstraintSpec>& specs, const TrainConfig& cfg,
    TraceSink& sink, const EvalE* eval_env = nullptr,
    const std::function<void(const P&, std::int64_t)>& checkpoint_cb = {}) {
  cfg.validate();
  if (specs.size() != env.num_constraints())
    throw std::invalid_argument("run_stochastic_primal_dual: constraint spec count mismatch");

  const Eigen::VectorXd c = thresholds(specs);
  const Eigen::VectorXd c_step = per_step_thresholds(specs, cfg.mode, cfg.gamma);
  Eigen::VectorXd lambda = cfg.fixed_lambda
                               ? Eigen::VectorXd::Constant(c.size(), *cfg.fixed_lambda)
                               : Eigen::VectorXd::Zero(c.size());
  HorizonSampler sampler(cfg.mode == TaskMode::Continuing ? cfg.gamma : 0.5,
                         detail::resolve_horizon_cap(cfg));
  const HorizonKind kind = cfg.mode == TaskMode::Episodic ? HorizonKind::FixedHorizon
                                                          : HorizonKind::GeometricHorizon;
  const double baseline = cfg.baseline.value_or(0.0);

  typename P::Params theta = policy.params();
  for (std::int64_t k = 0; k < cfg.iterations; ++k) {
    typename P::Params grad_sum;
    Eigen::VectorXd u_sum = Eigen::VectorXd::Zero(c.size());
    double lagrangian_sum = 0.0;
    double plain_sum = 0.0;
    double steps_sum = 0.0;

    for (std::int64_t b = 0; b < cfg.batch_size; ++b) {
      const std::int64_t horizon = detail::draw_horizon(cfg, sampler, static_cast<std::uint64_t>(k),
                                                        static_cast<std::uint64_t>(b));
      RolloutStreams streams = RolloutStreams::make(cfg.seed, static_cast<std::uint64_t>(k),
                                                    static_cast<std::uint64_t>(b));
      auto traj = rollout(env, policy, static_cast<std::size_t>(horizon), streams, kind);
      const LagrangianReturn ret = lagrangian_return(traj, lambda, c_step, cfg.mode);
      typename P::Params grad =
          estimate_primal_gradient(traj, policy, lambda, c_step, cfg.mode, cfg.variant, baseline);
      if (b == 0)
        grad_sum = std::move(grad);
      else
        grad_sum += grad;
      u_sum += estimate_constraint(traj, cfg.mode);
      lagrangian_sum += ret.total;
      plain_sum += ret.plain;
      steps_sum += static_cast<double>(traj.length());
    }
    const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
    grad_sum *= inv_b;
    const Eigen::VectorXd u_hat = u_sum * inv_b;

    const double decay = cfg.step_decay ? 1.0 / std::sqrt(static_cast<double>(k + 1)) : 1.0;
    theta = primal_update(theta, grad_sum, cfg.eta_theta * decay);
    policy.set_params(theta);
    if (!cfg.fixed_lambda) lambda = dual_update(lambda, u_hat, c, cfg.eta_lambda * decay);
    detail::check_finite_params(theta, lambda, k);

    StepRecord record;
    record.iteration = k;
    record.lambda = lambda;
    record.u_hat = u_hat;
    record.lagrangian_return = lagrangian_sum * inv_b;
    record.plain_return = plain_sum * inv_b;
    record.steps = steps_sum * inv_b;
    sink.on_step(record);

    const bool cadence_hit = cfg.eval_cadence > 0 && (k + 1) % cfg.eval_cadence == 0;
    const bool last = (k + 1) == cfg.iterations;
    if (cfg.eval_rollouts > 0 && (cadence_hit || last)) {
      detail::run_eval_block(env, eval_env, policy, cfg, k + 1, sink);
      if (checkpoint_cb) checkpoint_cb(policy, k + 1);
    }
  }

  TrainResult<P> result{std::move(policy), Multipliers(lambda), sampler.truncations()};
  return result;
}

// Dual descent: each outer iteration approximates the Lagrangian maximizer
// with a fixed budget of stochastic primal steps at frozen lambda, then
// takes one projected dual step from a fresh batch estimate of the
// constraints. One trace row per outer iteration.
template <Environment E, typename P, Environment EvalE = E>
  requires DifferentiablePolicyFor<P, typename E::State, typename E::Action>
TrainResult<P> run_dual_descent(
    const E& env, P policy, const std::vector<ConstraintSpec>& specs, const TrainConfig& cfg,
    TraceSink& sink, const EvalE* eval_env = nullptr,
    const std::function<void(const P&, std::int64_t)>& checkpoint_cb = {}) {
  cfg.validate();
  if (specs.size() != env.num_constraints())
    throw std::invalid_argument("run_dual_descent: constraint spec count mismatch");

  const Eigen::VectorXd c = thresholds(specs);
  const Eigen::VectorXd c_step = per_step_thresholds(specs, cfg.mode, cfg.gamma);
  Eigen::VectorXd lambda = cfg.fixed_lambda
                               ? Eigen::VectorXd::Constant(c.size(), *cfg.fixed_lambda)
                               : Eigen::VectorXd::Zero(c.size());
  HorizonSampler sampler(cfg.mode == TaskMode::Continuing ? cfg.gamma : 0.5,
                         detail::resolve_horizon_cap(cfg));
  const HorizonKind kind = cfg.mode == TaskMode::Episodic ? HorizonKind::FixedHorizon
                                                          : HorizonKind::GeometricHorizon;
  const double baseline = cfg.baseline.value_or(0.0);

  typename P::Params theta = policy.params();
  std::uint64_t step_counter = 0;
  for (std::int64_t k = 0; k < cfg.iterations; ++k) {
    // Inner primal budget approximating max_theta L(theta, lambda^k).
    for (std::int64_t inner = 0; inner < cfg.inner_iterations; ++inner) {
      const std::int64_t horizon = detail::draw_horizon(cfg, sampler, step_counter, 0);
      RolloutStreams streams = RolloutStreams::make(cfg.seed, step_counter, 0);
      ++step_counter;
      auto traj = rollout(env, policy, static_cast<std::size_t>(horizon), streams, kind);
      typename P::Params grad =
          estimate_primal_gradient(traj, policy, lambda, c_step, cfg.mode, cfg.variant, baseline);
      theta = primal_update(theta, grad, cfg.eta_theta);
      policy.set_params(theta);
    }

    // Fresh batch for the dual step and the trace row.
    Eigen::VectorXd u_sum = Eigen::VectorXd::Zero(c.size());
    double lagrangian_sum = 0.0;
    double plain_sum = 0.0;
    double steps_sum = 0.0;
    for (std::int64_t b = 0; b < cfg.batch_size; ++b) {
      const std::int64_t horizon = detail::draw_horizon(cfg, sampler, step_counter, 0);
      RolloutStreams streams = RolloutStreams::make(cfg.seed, step_counter, 0);
      ++step_counter;
      auto traj = rollout(env, policy, static_cast<std::size_t>(horizon), streams, kind);
      const LagrangianReturn ret = lagrangian_return(traj, lambda, c_step, cfg.mode);
      u_sum += estimate_constraint(traj, cfg.mode);
      lagrangian_sum += ret.total;
      plain_sum += ret.plain;
      steps_sum += static_cast<double>(traj.length());
    }
    const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
    const Eigen::VectorXd u_hat = u_sum * inv_b;
    if (!cfg.fixed_lambda) lambda = dual_update(lambda, u_hat, c, cfg.eta_lambda);
    detail::check_finite_params(theta, lambda, k);

    StepRecord record;
    record.iteration = k;
    record.lambda = lambda;
    record.u_hat = u_hat;
    record.lagrangian_return = lagrangian_sum * inv_b;
    record.plain_return = plain_sum * inv_b;
    record.steps = steps_sum * inv_b;
    sink.on_step(record);

    const bool cadence_hit = cfg.eval_cadence > 0 && (k + 1) % cfg.eval_cadence == 0;
    const bool last = (k + 1) == cfg.iterations;
    if (cfg.eval_rollouts > 0 && (cadence_hit || last)) {
      detail::run_eval_block(env, eval_env, policy, cfg, k + 1, sink);
      if (checkpoint_cb) checkpoint_cb(policy, k + 1);
    }
  }

  TrainResult<P> result{std::move(policy), Multipliers(lambda), sampler.truncations()};
  return result;
}

}  // namespace saferl
