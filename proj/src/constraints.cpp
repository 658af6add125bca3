#include "saferl/constraints.hpp"

#include <cmath>
#include <stdexcept>

namespace saferl {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("delta must lie in (0,1)");
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !(gamma < 1.0))
    throw std::invalid_argument("gamma must lie in (0,1)");
}

}  // namespace

SlackResult slack_episodic(double delta, std::int64_t horizon) {
  check_delta(delta);
  if (horizon < 0) throw std::invalid_argument("slack_episodic: horizon must be >= 0");
  const double t = static_cast<double>(horizon);
  const double epsilon = delta * t / (t + 1.0);
  return {epsilon, 1.0 - delta + epsilon};
}

SlackResult slack_discounted(double delta, double gamma, std::int64_t t_safe) {
  check_delta(delta);
  check_gamma(gamma);
  if (t_safe < 0) throw std::invalid_argument("slack_discounted: t_safe must be >= 0");
  const double epsilon =
      delta * (1.0 - std::pow(gamma, static_cast<double>(t_safe)) * (1.0 - gamma));
  return {epsilon, (1.0 - delta + epsilon) / (1.0 - gamma)};
}

std::optional<double> certify_joint_safety(const std::vector<double>& mu,
                                           const std::vector<double>& probs, double mu_prime,
                                           std::size_t k) {
  if (mu.size() != probs.size())
    throw std::invalid_argument("certify_joint_safety: mu and probs must have equal length");
  if (mu.empty()) throw std::invalid_argument("certify_joint_safety: empty weight sequence");
  if (k >= mu.size()) throw std::invalid_argument("certify_joint_safety: k out of range");
  for (double p : probs)
    if (!(p >= 0.0) || !(p <= 1.0))
      throw std::invalid_argument("certify_joint_safety: probabilities must lie in [0,1]");

  for (double w : mu)
    if (!(w > 0.0)) return std::nullopt;
  for (std::size_t t = 1; t < mu.size(); ++t)
    if (mu[t] > mu[t - 1]) return std::nullopt;
  if (!(mu_prime > 0.0) || mu_prime > mu[k]) return std::nullopt;

  double weight_sum = 0.0;
  double weighted_probs = 0.0;
  for (std::size_t t = 0; t < mu.size(); ++t) {
    weight_sum += mu[t];
    weighted_probs += mu[t] * probs[t];
  }
  return (weight_sum - weighted_probs) / mu_prime;
}

ConstraintSpec ConstraintSpec::episodic(std::size_t index, double delta, std::int64_t horizon) {
  SlackResult s = slack_episodic(delta, horizon);
  ConstraintSpec spec;
  spec.index = index;
  spec.delta = delta;
  spec.epsilon = s.epsilon;
  spec.threshold = s.threshold;
  spec.mode = TaskMode::Episodic;
  spec.derivation = "episodic-slack";
  return spec;
}

ConstraintSpec ConstraintSpec::discounted(std::size_t index, double delta, double gamma,
                                          std::int64_t t_safe) {
  SlackResult s = slack_discounted(delta, gamma, t_safe);
  ConstraintSpec spec;
  spec.index = index;
  spec.delta = delta;
  spec.epsilon = s.epsilon;
  spec.threshold = s.threshold;
  spec.mode = TaskMode::Continuing;
  spec.derivation = "discounted-slack";
  return spec;
}

ConstraintSpec ConstraintSpec::raw(std::size_t index, double threshold, TaskMode mode,
                                   double gamma) {
  if (!std::isfinite(threshold)) throw std::invalid_argument("raw threshold must be finite");
  if (mode == TaskMode::Episodic) {
    if (!(threshold <= 1.0))
      throw std::invalid_argument("episodic threshold exceeds 1, the maximum averaged indicator");
  } else {
    check_gamma(gamma);
    // Strictly below 1/(1-gamma), with a relative margin so values sitting
    // on the mathematical boundary are rejected despite rounding.
    if (!(threshold < (1.0 - 1e-12) / (1.0 - gamma)))
      throw std::invalid_argument(
          "discounted threshold must be strictly below 1/(1-gamma); no policy is feasible "
          "otherwise");
  }
  ConstraintSpec spec;
  spec.index = index;
  spec.threshold = threshold;
  spec.mode = mode;
  spec.derivation = "raw";
  return spec;
}

Multipliers::Multipliers(Eigen::VectorXd values) { set(std::move(values)); }

Multipliers Multipliers::constant(std::size_t m, double value) {
  if (value < 0.0) throw std::invalid_argument("Multipliers must be nonnegative");
  Multipliers out;
  out.lambda_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m), value);
  return out;
}

void Multipliers::set(Eigen::VectorXd values) {
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (!(values[i] >= 0.0))
      throw std::invalid_argument("Multipliers must be nonnegative and finite");
  lambda_ = std::move(values);
}

Eigen::VectorXd thresholds(const std::vector<ConstraintSpec>& specs) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(specs.size()));
  for (std::size_t i = 0; i < specs.size(); ++i) c[static_cast<Eigen::Index>(i)] = specs[i].threshold;
  return c;
}

Eigen::VectorXd per_step_thresholds(const std::vector<ConstraintSpec>& specs, TaskMode mode,
                                    double gamma) {
  Eigen::VectorXd c = thresholds(specs);
  if (mode == TaskMode::Continuing) c *= (1.0 - gamma);
  return c;
}

}  // namespace saferl
