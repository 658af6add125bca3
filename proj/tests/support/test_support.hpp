#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "saferl/rng.hpp"
#include "saferl/tabular.hpp"

namespace saferl::testing {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;  // standard error of the mean
};

inline MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  out.se = out.sd / std::sqrt(n);
  return out;
}

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Two-state, two-action test policy with one logit per state:
// pi(a=1|s) = sigmoid(theta[s]). Its score is exactly computable, making it
// the reference instrument for gradient-estimator checks.
class SoftmaxTestPolicy {
 public:
  using State = std::size_t;
  using Action = std::size_t;
  using Params = Eigen::VectorXd;

  explicit SoftmaxTestPolicy(Eigen::VectorXd theta) : theta_(std::move(theta)) {}

  const Params& params() const { return theta_; }
  void set_params(Params theta) { theta_ = std::move(theta); }

  double prob_action_one(State s) const {
    return 1.0 / (1.0 + std::exp(-theta_[static_cast<Eigen::Index>(s)]));
  }

  Action sample_action(State s, std::mt19937_64& g) const {
    return rng::uniform01(g) < prob_action_one(s) ? 1 : 0;
  }

  double log_density(State s, Action a) const {
    const double p = prob_action_one(s);
    return std::log(a == 1 ? p : 1.0 - p);
  }

  Params score(State s, Action a) const {
    Params grad = Params::Zero(theta_.size());
    grad[static_cast<Eigen::Index>(s)] = (a == 1 ? 1.0 : 0.0) - prob_action_one(s);
    return grad;
  }

  TabularPolicy as_tabular(std::size_t n_states) const {
    TabularPolicy p;
    p.probs.resize(static_cast<Eigen::Index>(n_states), 2);
    for (std::size_t s = 0; s < n_states; ++s) {
      const double p1 = prob_action_one(s);
      p.probs(static_cast<Eigen::Index>(s), 0) = 1.0 - p1;
      p.probs(static_cast<Eigen::Index>(s), 1) = p1;
    }
    return p;
  }

 private:
  Eigen::VectorXd theta_;
};

// Fixed 2-state/2-action CMDP with one constraint; both actions matter in
// both states so that every parameter coordinate has signal.
inline TabularCmdp make_two_state_cmdp(double gamma = 0.9) {
  TabularCmdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 2;
  mdp.gamma = gamma;
  mdp.transitions.resize(2);
  mdp.transitions[0].resize(2, 2);
  mdp.transitions[0] << 0.8, 0.2,  // action 0 mostly stays
      0.3, 0.7;
  mdp.transitions[1].resize(2, 2);
  mdp.transitions[1] << 0.1, 0.9,  // action 1 mostly moves to state 1
      0.6, 0.4;
  mdp.rewards.resize(2, 2);
  mdp.rewards << 1.0, 0.2, 2.0, 0.5;
  mdp.indicators.resize(2, 1);
  mdp.indicators << 1.0, 0.0;  // state 0 is safe, state 1 is not
  mdp.initial.resize(2);
  mdp.initial << 0.6, 0.4;
  mdp.c.resize(1);
  mdp.c << 4.0;
  mdp.validate();
  return mdp;
}

// Exact discounted sum of per-step safe probabilities by matrix powers,
// independent of the linear-solve route used in the library.
inline Eigen::VectorXd discounted_indicator_by_powers(const TabularCmdp& mdp,
                                                      const TabularPolicy& policy,
                                                      double tail_tol = 1e-13) {
  const Eigen::Index n = static_cast<Eigen::Index>(mdp.n_states);
  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index s = 0; s < n; ++s)
    for (std::size_t a = 0; a < mdp.n_actions; ++a)
      p_pi.row(s) += policy.probs(s, static_cast<Eigen::Index>(a)) * mdp.transitions[a].row(s);

  Eigen::VectorXd marginal = mdp.initial;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(mdp.indicators.cols());
  double weight = 1.0;
  while (weight > tail_tol) {
    total += weight * (mdp.indicators.transpose() * marginal);
    marginal = p_pi.transpose() * marginal;
    weight *= mdp.gamma;
  }
  return total;
}

// Same matrix-power route for the discounted reward value.
inline double discounted_value_by_powers(const TabularCmdp& mdp, const TabularPolicy& policy,
                                         double tail_tol = 1e-13) {
  const Eigen::Index n = static_cast<Eigen::Index>(mdp.n_states);
  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(n);
  for (Eigen::Index s = 0; s < n; ++s)
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      p_pi.row(s) += policy.probs(s, static_cast<Eigen::Index>(a)) * mdp.transitions[a].row(s);
      r_pi[s] += policy.probs(s, static_cast<Eigen::Index>(a)) *
                 mdp.rewards(s, static_cast<Eigen::Index>(a));
    }
  Eigen::VectorXd marginal = mdp.initial;
  double total = 0.0;
  double weight = 1.0;
  while (weight > tail_tol) {
    total += weight * marginal.dot(r_pi);
    marginal = p_pi.transpose() * marginal;
    weight *= mdp.gamma;
  }
  return total;
}

}  // namespace saferl::testing
