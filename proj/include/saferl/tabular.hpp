#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "saferl/constraints.hpp"
#include "saferl/rng.hpp"

namespace saferl {

// Finite constrained MDP small enough that discounted values, the dual
// function, and near-optimal constrained values are all computable exactly.
struct TabularCmdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  double gamma = 0.9;
  std::vector<Eigen::MatrixXd> transitions;  // per action: n_states x n_states rows P(s' | s, a)
  Eigen::MatrixXd rewards;                   // n_states x n_actions
  Eigen::MatrixXd indicators;                // n_states x m, entries in {0,1}
  Eigen::VectorXd initial;                   // distribution over states
  Eigen::VectorXd c;                         // thresholds, length m

  std::size_t num_constraints() const { return static_cast<std::size_t>(indicators.cols()); }
  void validate() const;  // throws std::invalid_argument on any broken invariant
};

// Stationary randomized policy: one distribution over actions per state.
struct TabularPolicy {
  Eigen::MatrixXd probs;  // n_states x n_actions, rows on the simplex

  static TabularPolicy uniform(std::size_t n_states, std::size_t n_actions);
  static TabularPolicy deterministic(std::size_t n_states, std::size_t n_actions,
                                     const std::vector<std::size_t>& actions);
  void validate() const;
};

struct TabularValues {
  double value = 0.0;        // V(pi) under the initial distribution
  Eigen::VectorXd safety_u;  // U_i(pi), length m
};

// Exact discounted values by linear solve of the fixed-point system; the
// indicator of each safe set is treated as a per-state reward.
TabularValues exact_values(const TabularCmdp& mdp, const TabularPolicy& policy);

// Lagrangian L(pi, lambda) = V(pi) + lambda . (U(pi) - c).
double tabular_lagrangian(const TabularCmdp& mdp, const TabularPolicy& policy,
                          const Eigen::VectorXd& lambda);

struct DualEvaluation {
  double value = 0.0;  // d(lambda) = max_pi L(pi, lambda)
  TabularPolicy argmax;
  Eigen::VectorXd safety_u;  // U(argmax), the Danskin subgradient is safety_u - c
};

// Evaluates the dual function by solving the unconstrained MDP with reward
// r_lambda(s,a) = r(s,a) + sum_i lambda_i (ind_i(s) - c_i (1-gamma)):
// value iteration to tolerance 1e-10, greedy policy extraction, then an
// exact policy-evaluation solve for the returned value.
DualEvaluation exact_dual(const TabularCmdp& mdp, const Eigen::VectorXd& lambda);

struct BruteForceResult {
  bool feasible_found = false;
  bool complete = true;  // false when the enumeration budget cut the sweep short
  double best_value = 0.0;
  TabularPolicy best_policy;
  double best_slack = 0.0;       // max over enumerated policies of min_i (U_i - c_i)
  std::uint64_t enumerated = 0;  // policies actually evaluated
};

// Enumerates stationary randomized policies with per-state action
// distributions on a simplex grid with `resolution` subdivisions and keeps
// the best feasible one. The grid contains every deterministic policy, so
// unconstrained instances are solved exactly.
BruteForceResult brute_force_primal(const TabularCmdp& mdp, std::size_t resolution,
                                    std::uint64_t max_policies = 200'000'000ULL);

struct DualDescentOptions {
  double step = 0.01;
  std::size_t iterations = 10'000;
  std::size_t restarts = 10;
  double grad_tolerance = 1e-6;
  std::uint64_t seed = 0;
  double restart_scale = 5.0;  // restarts draw lambda uniformly in [0, scale]^m
};

struct DualMinimum {
  double value = 0.0;  // best d(lambda) seen across iterates and restarts
  Eigen::VectorXd lambda;
};

// Projected subgradient descent on the convex dual, multi-start, keeping the
// best iterate.
DualMinimum minimize_dual(const TabularCmdp& mdp, const DualDescentOptions& opts = {});

enum class GapStatus { Verified, NoSlaterPoint };

struct DualityGapReport {
  GapStatus status = GapStatus::Verified;
  double dual_optimum = 0.0;    // D*
  double primal_optimum = 0.0;  // grid P*
  double gap = 0.0;             // D* - P*
  Eigen::VectorXd lambda_star;
  bool brute_force_complete = true;
};

// Empirical strong-duality check: D* from dual minimization against P* from
// the brute-force grid. Reports NoSlaterPoint when no grid policy is
// strictly feasible.
DualityGapReport duality_gap(const TabularCmdp& mdp, std::size_t resolution = 200,
                             const DualDescentOptions& opts = {});

// Dual descent with exact inner maximization: lambda^{k+1} =
// [lambda^k - eta (U(pi*(lambda^k)) - c)]_+, recording d(lambda^k) per step.
struct ExactDualDescentTrace {
  std::vector<Eigen::VectorXd> lambdas;
  std::vector<double> dual_values;
};
ExactDualDescentTrace dual_descent_exact(const TabularCmdp& mdp, double eta,
                                         std::size_t iterations,
                                         const Eigen::VectorXd& lambda0);

// Environment-concept adapter so the generic rollout and estimator machinery
// runs on tabular instances.
class TabularEnv {
 public:
  using State = std::size_t;
  using Action = std::size_t;

  explicit TabularEnv(TabularCmdp mdp) : mdp_(std::move(mdp)) { mdp_.validate(); }

  const TabularCmdp& mdp() const { return mdp_; }

  State step(State s, Action a, std::mt19937_64& g) const;
  double reward(State s, Action a) const {
    return mdp_.rewards(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  }
  bool in_safe_set(State s, std::size_t i) const {
    return mdp_.indicators(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) != 0.0;
  }
  std::size_t num_constraints() const { return mdp_.num_constraints(); }
  State sample_initial(std::mt19937_64& g) const;

 private:
  TabularCmdp mdp_;
};

// Policy-concept adapter over a fixed TabularPolicy.
class TabularPolicySampler {
 public:
  explicit TabularPolicySampler(TabularPolicy policy) : policy_(std::move(policy)) {}
  std::size_t sample_action(std::size_t s, std::mt19937_64& g) const;
  const TabularPolicy& policy() const { return policy_; }

 private:
  TabularPolicy policy_;
};

// The repo-fixed verification instance: 3 states, 2 actions, 1 constraint,
// gamma = 0.9, generated from a documented seed with rejection until a
// strictly feasible policy exists and the constraint binds at the optimum
// (the unconstrained maximizer violates it).
TabularCmdp make_verification_cmdp();

// Seeded random instance of the same shape (used for property tests); the
// threshold is placed between the unconstrained optimum's safety value and
// the maximum attainable one, so Slater's condition holds by construction.
TabularCmdp make_random_cmdp(std::uint64_t seed, std::size_t n_states = 3,
                             std::size_t n_actions = 2, double gamma = 0.9);

}  // namespace saferl
