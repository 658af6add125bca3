#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace saferl {

enum class TaskMode { Episodic, Continuing };

struct SlackResult {
  double epsilon;
  double threshold;  // c
};

// epsilon = delta * T / (T+1), c = 1 - delta + epsilon = 1 - delta/(T+1).
// Feasible policies of the tightened averaged-indicator problem keep the
// joint stay probability at least 1 - delta over t = 0..T.
SlackResult slack_episodic(double delta, std::int64_t horizon);

// epsilon = delta * (1 - gamma^{t_safe} * (1-gamma)),
// c = (1 - delta + epsilon) / (1 - gamma). Feasible policies of the
// tightened discounted problem are (1-delta)-safe up to time t_safe.
SlackResult slack_discounted(double delta, double gamma, std::int64_t t_safe);

// Certificate from the weighted-average probability inequality: given
// positive non-increasing weights mu_t, per-event probabilities p_t, and
// mu_prime <= mu_k, the events E_0..E_k hold jointly with probability at
// least 1 - delta_cert where
//   delta_cert = (sum_t mu_t - sum_t mu_t p_t) / mu_prime.
// Returns nullopt when the weight structure cannot certify (mu not
// non-increasing, non-positive entries, or mu_prime > mu_k) -- in that case
// the certificate is invalid, not merely loose.
std::optional<double> certify_joint_safety(const std::vector<double>& mu,
                                           const std::vector<double>& probs, double mu_prime,
                                           std::size_t k);

// One safety constraint: safe-set index resolved by the environment, the
// demanded unsafety level delta, and the derived slack/threshold pair.
struct ConstraintSpec {
  std::size_t index = 0;
  double delta = 0.0;    // 0 when the threshold was given directly
  double epsilon = 0.0;  // idem
  double threshold = 0.0;
  TaskMode mode = TaskMode::Continuing;
  std::string derivation;  // "episodic-slack" | "discounted-slack" | "raw"

  static ConstraintSpec episodic(std::size_t index, double delta, std::int64_t horizon);
  static ConstraintSpec discounted(std::size_t index, double delta, double gamma,
                                   std::int64_t t_safe);
  // Direct threshold entry; gamma is required in continuing mode to check
  // c < 1/(1-gamma), without which no policy is feasible.
  static ConstraintSpec raw(std::size_t index, double threshold, TaskMode mode,
                            double gamma = 0.0);
};

// Nonnegative dual vector. Mutations go through set()/projected updates so
// the invariant cannot be broken silently.
class Multipliers {
 public:
  Multipliers() = default;
  explicit Multipliers(std::size_t m) : lambda_(Eigen::VectorXd::Zero(m)) {}
  explicit Multipliers(Eigen::VectorXd values);

  static Multipliers constant(std::size_t m, double value);

  std::size_t size() const { return static_cast<std::size_t>(lambda_.size()); }
  double operator[](std::size_t i) const { return lambda_[static_cast<Eigen::Index>(i)]; }
  const Eigen::VectorXd& values() const { return lambda_; }

  void set(Eigen::VectorXd values);

 private:
  Eigen::VectorXd lambda_;
};

// Threshold vector c of a constraint set, in trajectory-estimate units.
Eigen::VectorXd thresholds(const std::vector<ConstraintSpec>& specs);

// Per-step threshold used inside the penalized reward. Episodic mode uses c
// itself; continuing mode uses c*(1-gamma) so the geometric-horizon sum of
// per-step penalties is unbiased for lambda_i * (U_i - c_i).
Eigen::VectorXd per_step_thresholds(const std::vector<ConstraintSpec>& specs, TaskMode mode,
                                    double gamma);

}  // namespace saferl
