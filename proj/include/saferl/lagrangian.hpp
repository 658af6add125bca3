#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "saferl/constraints.hpp"
#include "saferl/mdp_core.hpp"

namespace saferl {

enum class GradientVariant { Paper, FullReinforce };

struct LagrangianReturn {
  double total = 0.0;               // sum of penalized per-step rewards
  double plain = 0.0;               // sum of raw rewards
  Eigen::VectorXd indicator_sums;   // per-constraint counts over t = 0..horizon
  std::size_t horizon = 0;
};

// r_lambda(s, a) = r + sum_i lambda_i (indicator_i - c_per_step_i).
inline double penalized_reward(double r, const std::uint8_t* indicators,
                               const Eigen::VectorXd& lambda, const Eigen::VectorXd& c_per_step) {
  if (lambda.size() != c_per_step.size())
    throw std::invalid_argument("penalized_reward: lambda and threshold dimensions differ");
  double out = r;
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    out += lambda[i] * (static_cast<double>(indicators[static_cast<std::size_t>(i)]) -
                        c_per_step[i]);
  return out;
}

inline double penalized_reward(double r, const std::vector<std::uint8_t>& indicators,
                               const Eigen::VectorXd& lambda, const Eigen::VectorXd& c_per_step) {
  if (static_cast<Eigen::Index>(indicators.size()) != lambda.size())
    throw std::invalid_argument("penalized_reward: indicator dimension mismatch");
  return penalized_reward(r, indicators.data(), lambda, c_per_step);
}

namespace detail {

inline void check_mode(HorizonKind kind, TaskMode mode) {
  const bool ok = (mode == TaskMode::Episodic && kind == HorizonKind::FixedHorizon) ||
                  (mode == TaskMode::Continuing && kind == HorizonKind::GeometricHorizon);
  if (!ok)
    throw std::invalid_argument(
        "trajectory horizon kind does not match the task mode it is being scored under");
}

}  // namespace detail

// Sum of penalized rewards over the stored horizon (undiscounted within the
// sampled window; the geometric horizon supplies the discounting in
// continuing mode, so the expectation equals the Lagrangian in both modes).
template <typename S, typename A>
LagrangianReturn lagrangian_return(const Trajectory<S, A>& traj, const Eigen::VectorXd& lambda,
                                   const Eigen::VectorXd& c_per_step, TaskMode mode) {
  detail::check_mode(traj.kind, mode);
  if (static_cast<Eigen::Index>(traj.m) != lambda.size())
    throw std::invalid_argument("lagrangian_return: constraint count mismatch");

  LagrangianReturn out;
  out.horizon = traj.horizon();
  out.indicator_sums = Eigen::VectorXd::Zero(lambda.size());
  for (std::size_t t = 0; t < traj.length(); ++t) {
    out.plain += traj.rewards[t];
    out.total += penalized_reward(traj.rewards[t], traj.indicators.data() + t * traj.m, lambda,
                                  c_per_step);
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
      out.indicator_sums[i] += static_cast<double>(traj.indicators[t * traj.m + static_cast<std::size_t>(i)]);
  }
  return out;
}

// Single-trajectory constraint estimate: the averaged indicator in episodic
// mode, the plain indicator count in continuing mode (unbiased for the
// discounted constraint value under the geometric horizon).
template <typename S, typename A>
Eigen::VectorXd estimate_constraint(const Trajectory<S, A>& traj, TaskMode mode) {
  detail::check_mode(traj.kind, mode);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(traj.m));
  for (std::size_t t = 0; t < traj.length(); ++t)
    for (std::size_t i = 0; i < traj.m; ++i)
      u[static_cast<Eigen::Index>(i)] += static_cast<double>(traj.indicators[t * traj.m + i]);
  if (mode == TaskMode::Episodic) u /= static_cast<double>(traj.length());
  return u;
}

// Score-function estimate of the primal gradient.
//   Paper:         R_lambda(trajectory) * score(s_0, a_0)
//   FullReinforce: sum_t (penalized return from t) * score(s_t, a_t)
// Under a geometric horizon the FullReinforce form is unbiased for the
// gradient of the discounted Lagrangian, occupancy weighting included.
template <typename P, typename S, typename A>
  requires DifferentiablePolicyFor<P, S, A>
typename P::Params estimate_primal_gradient(const Trajectory<S, A>& traj, const P& policy,
                                            const Eigen::VectorXd& lambda,
                                            const Eigen::VectorXd& c_per_step, TaskMode mode,
                                            GradientVariant variant, double baseline = 0.0) {
  detail::check_mode(traj.kind, mode);
  if (variant == GradientVariant::Paper) {
    const LagrangianReturn ret = lagrangian_return(traj, lambda, c_per_step, mode);
    typename P::Params grad = policy.score(traj.states[0], traj.actions[0]);
    grad *= (ret.total - baseline);
    return grad;
  }
  if (variant != GradientVariant::FullReinforce)
    throw std::invalid_argument("estimate_primal_gradient: unknown variant");

  // Suffix sums of penalized rewards, then one score term per step.
  const std::size_t len = traj.length();
  std::vector<double> to_go(len + 1, 0.0);
  for (std::size_t t = len; t-- > 0;)
    to_go[t] = to_go[t + 1] + penalized_reward(traj.rewards[t],
                                               traj.indicators.data() + t * traj.m, lambda,
                                               c_per_step);
  typename P::Params grad = policy.score(traj.states[0], traj.actions[0]);
  grad *= (to_go[0] - baseline);
  for (std::size_t t = 1; t < len; ++t) {
    typename P::Params term = policy.score(traj.states[t], traj.actions[t]);
    term *= (to_go[t] - baseline);
    grad += term;
  }
  return grad;
}

}  // namespace saferl
