#include "saferl/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace saferl {

namespace {

Eigen::Index ei(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Mean transition matrix and mean reward vector under a fixed policy.
void policy_dynamics(const TabularCmdp& mdp, const TabularPolicy& policy, Eigen::MatrixXd& p_pi,
                     Eigen::VectorXd& r_pi) {
  const auto n = ei(mdp.n_states);
  p_pi.setZero(n, n);
  r_pi.setZero(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      const double w = policy.probs(s, ei(a));
      if (w == 0.0) continue;
      p_pi.row(s).noalias() += w * mdp.transitions[a].row(s);
      r_pi[s] += w * mdp.rewards(s, ei(a));
    }
  }
}

}  // namespace

void TabularCmdp::validate() const {
  if (n_states == 0 || n_actions == 0)
    throw std::invalid_argument("TabularCmdp: empty state or action space");
  if (n_states * n_actions > 64)
    throw std::invalid_argument("TabularCmdp: instance exceeds the desk-scale limit (64)");
  if (!(gamma > 0.0) || !(gamma < 1.0))
    throw std::invalid_argument("TabularCmdp: gamma must lie in (0,1)");
  if (transitions.size() != n_actions)
    throw std::invalid_argument("TabularCmdp: one transition matrix per action required");
  for (const auto& p : transitions) {
    if (p.rows() != ei(n_states) || p.cols() != ei(n_states))
      throw std::invalid_argument("TabularCmdp: transition matrix shape mismatch");
    for (Eigen::Index s = 0; s < p.rows(); ++s) {
      double row_sum = 0.0;
      for (Eigen::Index t = 0; t < p.cols(); ++t) {
        if (p(s, t) < 0.0) throw std::invalid_argument("TabularCmdp: negative probability");
        row_sum += p(s, t);
      }
      if (std::abs(row_sum - 1.0) > 1e-12)
        throw std::invalid_argument("TabularCmdp: transition rows must sum to 1 (1e-12)");
    }
  }
  if (rewards.rows() != ei(n_states) || rewards.cols() != ei(n_actions))
    throw std::invalid_argument("TabularCmdp: reward table shape mismatch");
  if (indicators.rows() != ei(n_states))
    throw std::invalid_argument("TabularCmdp: indicator table shape mismatch");
  if (indicators.cols() > 3)
    throw std::invalid_argument("TabularCmdp: at most 3 constraints supported");
  for (Eigen::Index s = 0; s < indicators.rows(); ++s)
    for (Eigen::Index i = 0; i < indicators.cols(); ++i)
      if (indicators(s, i) != 0.0 && indicators(s, i) != 1.0)
        throw std::invalid_argument("TabularCmdp: indicator entries must be 0 or 1");
  if (initial.size() != ei(n_states))
    throw std::invalid_argument("TabularCmdp: initial distribution length mismatch");
  double init_sum = 0.0;
  for (Eigen::Index s = 0; s < initial.size(); ++s) {
    if (initial[s] < 0.0) throw std::invalid_argument("TabularCmdp: negative initial probability");
    init_sum += initial[s];
  }
  if (std::abs(init_sum - 1.0) > 1e-12)
    throw std::invalid_argument("TabularCmdp: initial distribution must sum to 1");
  if (c.size() != indicators.cols())
    throw std::invalid_argument("TabularCmdp: one threshold per constraint required");
}

TabularPolicy TabularPolicy::uniform(std::size_t n_states, std::size_t n_actions) {
  TabularPolicy p;
  p.probs = Eigen::MatrixXd::Constant(ei(n_states), ei(n_actions), 1.0 / static_cast<double>(n_actions));
  return p;
}

TabularPolicy TabularPolicy::deterministic(std::size_t n_states, std::size_t n_actions,
                                           const std::vector<std::size_t>& actions) {
  if (actions.size() != n_states)
    throw std::invalid_argument("TabularPolicy: one action per state required");
  TabularPolicy p;
  p.probs = Eigen::MatrixXd::Zero(ei(n_states), ei(n_actions));
  for (std::size_t s = 0; s < n_states; ++s) {
    if (actions[s] >= n_actions) throw std::invalid_argument("TabularPolicy: action out of range");
    p.probs(ei(s), ei(actions[s])) = 1.0;
  }
  return p;
}

void TabularPolicy::validate() const {
  for (Eigen::Index s = 0; s < probs.rows(); ++s) {
    double row_sum = 0.0;
    for (Eigen::Index a = 0; a < probs.cols(); ++a) {
      if (probs(s, a) < 0.0) throw std::invalid_argument("TabularPolicy: negative probability");
      row_sum += probs(s, a);
    }
    if (std::abs(row_sum - 1.0) > 1e-9)
      throw std::invalid_argument("TabularPolicy: rows must lie on the simplex");
  }
}

TabularValues exact_values(const TabularCmdp& mdp, const TabularPolicy& policy) {
  const auto n = ei(mdp.n_states);
  if (policy.probs.rows() != n || policy.probs.cols() != ei(mdp.n_actions))
    throw std::invalid_argument("exact_values: policy shape mismatch");

  Eigen::MatrixXd p_pi;
  Eigen::VectorXd r_pi;
  policy_dynamics(mdp, policy, p_pi, r_pi);

  // w = (I - gamma P_pi)^{-T} rho0, so that rho0^T (I - gamma P_pi)^{-1} x = w . x
  Eigen::MatrixXd a_t = Eigen::MatrixXd::Identity(n, n) - mdp.gamma * p_pi;
  a_t.transposeInPlace();
  Eigen::VectorXd w = a_t.partialPivLu().solve(mdp.initial);

  TabularValues out;
  out.value = w.dot(r_pi);
  out.safety_u = mdp.indicators.transpose() * w;
  return out;
}

double tabular_lagrangian(const TabularCmdp& mdp, const TabularPolicy& policy,
                          const Eigen::VectorXd& lambda) {
  TabularValues v = exact_values(mdp, policy);
  return v.value + lambda.dot(v.safety_u - mdp.c);
}

DualEvaluation exact_dual(const TabularCmdp& mdp, const Eigen::VectorXd& lambda) {
  const auto n = ei(mdp.n_states);
  const auto na = ei(mdp.n_actions);
  if (lambda.size() != mdp.c.size())
    throw std::invalid_argument("exact_dual: multiplier dimension mismatch");
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (!(lambda[i] >= 0.0)) throw std::invalid_argument("exact_dual: lambda must be nonnegative");

  // r_lambda(s, a) = r(s, a) + lambda . (ind(s) - c (1-gamma)); the constant
  // part discounts to exactly -lambda . c, matching the Lagrangian account.
  Eigen::MatrixXd r_lambda = mdp.rewards;
  const double c_shift = lambda.dot(mdp.c) * (1.0 - mdp.gamma);
  Eigen::VectorXd ind_bonus = mdp.indicators * lambda;
  for (Eigen::Index s = 0; s < n; ++s) r_lambda.row(s).array() += ind_bonus[s] - c_shift;

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v_next(n);
  const double residual_tol = 1e-10 * (1.0 - mdp.gamma) / (2.0 * mdp.gamma);
  const std::size_t max_sweeps = 1'000'000;
  std::size_t sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    for (Eigen::Index s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index a = 0; a < na; ++a) {
        const double q = r_lambda(s, a) + mdp.gamma * mdp.transitions[static_cast<std::size_t>(a)].row(s).dot(v);
        if (q > best) best = q;
      }
      v_next[s] = best;
    }
    const double residual = (v_next - v).cwiseAbs().maxCoeff();
    v = v_next;
    if (residual <= residual_tol) break;
  }
  if (sweep == max_sweeps) throw std::runtime_error("exact_dual: value iteration did not converge");

  std::vector<std::size_t> greedy(mdp.n_states, 0);
  for (Eigen::Index s = 0; s < n; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < na; ++a) {
      const double q = r_lambda(s, a) + mdp.gamma * mdp.transitions[static_cast<std::size_t>(a)].row(s).dot(v);
      if (q > best) {
        best = q;
        greedy[static_cast<std::size_t>(s)] = static_cast<std::size_t>(a);
      }
    }
  }

  DualEvaluation out;
  out.argmax = TabularPolicy::deterministic(mdp.n_states, mdp.n_actions, greedy);
  TabularValues vals = exact_values(mdp, out.argmax);
  out.value = vals.value + lambda.dot(vals.safety_u - mdp.c);
  out.safety_u = vals.safety_u;
  return out;
}

namespace {

// All distributions over n_actions with probabilities in multiples of
// 1/resolution (compositions of `resolution` into n_actions parts).
std::vector<Eigen::VectorXd> simplex_grid(std::size_t n_actions, std::size_t resolution) {
  std::vector<Eigen::VectorXd> out;
  std::vector<std::size_t> counts(n_actions, 0);
  const double inv = 1.0 / static_cast<double>(resolution);
  auto recurse = [&](auto&& self, std::size_t slot, std::size_t remaining) -> void {
    if (slot + 1 == n_actions) {
      counts[slot] = remaining;
      Eigen::VectorXd probs(ei(n_actions));
      for (std::size_t a = 0; a < n_actions; ++a)
        probs[ei(a)] = static_cast<double>(counts[a]) * inv;
      out.push_back(std::move(probs));
      return;
    }
    for (std::size_t k = 0; k <= remaining; ++k) {
      counts[slot] = k;
      self(self, slot + 1, remaining - k);
    }
  };
  recurse(recurse, 0, resolution);
  return out;
}

}  // namespace

BruteForceResult brute_force_primal(const TabularCmdp& mdp, std::size_t resolution,
                                    std::uint64_t max_policies) {
  if (resolution == 0) throw std::invalid_argument("brute_force_primal: resolution must be >= 1");
  mdp.validate();
  const auto n = ei(mdp.n_states);
  const std::vector<Eigen::VectorXd> grid = simplex_grid(mdp.n_actions, resolution);
  const std::size_t n_grid = grid.size();

  BruteForceResult result;
  result.best_slack = -std::numeric_limits<double>::infinity();
  result.best_value = -std::numeric_limits<double>::infinity();

  std::vector<std::size_t> digits(mdp.n_states, 0);
  Eigen::MatrixXd p_pi(n, n);
  Eigen::VectorXd r_pi(n);
  Eigen::MatrixXd a_t(n, n);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(n);
  Eigen::VectorXd w(n);
  Eigen::VectorXd u(mdp.c.size());

  const double feas_slack = 1e-10;
  bool done = false;
  while (!done) {
    if (result.enumerated >= max_policies) {
      result.complete = false;
      break;
    }
    ++result.enumerated;

    p_pi.setZero();
    r_pi.setZero();
    for (Eigen::Index s = 0; s < n; ++s) {
      const Eigen::VectorXd& probs = grid[digits[static_cast<std::size_t>(s)]];
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        const double weight = probs[ei(a)];
        if (weight == 0.0) continue;
        p_pi.row(s).noalias() += weight * mdp.transitions[a].row(s);
        r_pi[s] += weight * mdp.rewards(s, ei(a));
      }
    }
    a_t.noalias() = -mdp.gamma * p_pi.transpose();
    a_t.diagonal().array() += 1.0;
    lu.compute(a_t);
    w = lu.solve(mdp.initial);
    u.noalias() = mdp.indicators.transpose() * w;

    const double slack = (u - mdp.c).minCoeff();
    if (slack > result.best_slack) result.best_slack = slack;
    if (slack >= -feas_slack) {
      const double value = w.dot(r_pi);
      if (!result.feasible_found || value > result.best_value) {
        result.feasible_found = true;
        result.best_value = value;
        result.best_policy.probs.resize(n, ei(mdp.n_actions));
        for (Eigen::Index s = 0; s < n; ++s)
          result.best_policy.probs.row(s) = grid[digits[static_cast<std::size_t>(s)]].transpose();
      }
    }

    done = true;
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      if (++digits[s] < n_grid) {
        done = false;
        break;
      }
      digits[s] = 0;
    }
  }
  return result;
}

DualMinimum minimize_dual(const TabularCmdp& mdp, const DualDescentOptions& opts) {
  const Eigen::Index m = mdp.c.size();
  DualMinimum best;
  best.value = std::numeric_limits<double>::infinity();
  std::mt19937_64 g = rng::make_engine(opts.seed, "dual-restart");

  for (std::size_t restart = 0; restart < std::max<std::size_t>(opts.restarts, 1); ++restart) {
    Eigen::VectorXd lambda(m);
    if (restart == 0) {
      lambda.setZero();
    } else {
      for (Eigen::Index i = 0; i < m; ++i)
        lambda[i] = rng::uniform(g, 0.0, opts.restart_scale);
    }
    for (std::size_t it = 0; it < opts.iterations; ++it) {
      DualEvaluation eval = exact_dual(mdp, lambda);
      if (eval.value < best.value) {
        best.value = eval.value;
        best.lambda = lambda;
      }
      Eigen::VectorXd grad = eval.safety_u - mdp.c;
      if (grad.norm() < opts.grad_tolerance) break;
      lambda = (lambda - opts.step * grad).cwiseMax(0.0);
    }
  }
  return best;
}

DualityGapReport duality_gap(const TabularCmdp& mdp, std::size_t resolution,
                             const DualDescentOptions& opts) {
  DualityGapReport report;
  BruteForceResult primal = brute_force_primal(mdp, resolution);
  report.brute_force_complete = primal.complete;
  if (!primal.feasible_found || !(primal.best_slack > 0.0)) {
    report.status = GapStatus::NoSlaterPoint;
    return report;
  }
  DualMinimum dual = minimize_dual(mdp, opts);
  report.status = GapStatus::Verified;
  report.primal_optimum = primal.best_value;
  report.dual_optimum = dual.value;
  report.gap = dual.value - primal.best_value;
  report.lambda_star = dual.lambda;
  return report;
}

ExactDualDescentTrace dual_descent_exact(const TabularCmdp& mdp, double eta,
                                         std::size_t iterations, const Eigen::VectorXd& lambda0) {
  if (!(eta > 0.0)) throw std::invalid_argument("dual_descent_exact: eta must be > 0");
  ExactDualDescentTrace trace;
  Eigen::VectorXd lambda = lambda0;
  for (std::size_t k = 0; k < iterations; ++k) {
    DualEvaluation eval = exact_dual(mdp, lambda);
    trace.lambdas.push_back(lambda);
    trace.dual_values.push_back(eval.value);
    lambda = (lambda - eta * (eval.safety_u - mdp.c)).cwiseMax(0.0);
  }
  return trace;
}

TabularEnv::State TabularEnv::step(State s, Action a, std::mt19937_64& g) const {
  const auto& row = mdp_.transitions[a];
  double u = rng::uniform01(g);
  const Eigen::Index n = row.cols();
  for (Eigen::Index t = 0; t + 1 < n; ++t) {
    u -= row(ei(s), t);
    if (u < 0.0) return static_cast<State>(t);
  }
  return static_cast<State>(n - 1);
}

TabularEnv::State TabularEnv::sample_initial(std::mt19937_64& g) const {
  double u = rng::uniform01(g);
  const Eigen::Index n = mdp_.initial.size();
  for (Eigen::Index s = 0; s + 1 < n; ++s) {
    u -= mdp_.initial[s];
    if (u < 0.0) return static_cast<State>(s);
  }
  return static_cast<State>(n - 1);
}

std::size_t TabularPolicySampler::sample_action(std::size_t s, std::mt19937_64& g) const {
  double u = rng::uniform01(g);
  const Eigen::Index na = policy_.probs.cols();
  for (Eigen::Index a = 0; a + 1 < na; ++a) {
    u -= policy_.probs(ei(s), a);
    if (u < 0.0) return static_cast<std::size_t>(a);
  }
  return static_cast<std::size_t>(na - 1);
}

namespace {

// Best attainable discounted indicator mass for one constraint, by value
// iteration with the indicator as the only reward.
double max_safety_value(const TabularCmdp& mdp, Eigen::Index constraint) {
  const auto n = ei(mdp.n_states);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v_next(n);
  const double tol = 1e-12;
  for (std::size_t sweep = 0; sweep < 1'000'000; ++sweep) {
    for (Eigen::Index s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        const double q = mdp.indicators(s, constraint) + mdp.gamma * mdp.transitions[a].row(s).dot(v);
        if (q > best) best = q;
      }
      v_next[s] = best;
    }
    const double residual = (v_next - v).cwiseAbs().maxCoeff();
    v = v_next;
    if (residual <= tol) break;
  }
  return mdp.initial.dot(v);
}

}  // namespace

TabularCmdp make_random_cmdp(std::uint64_t seed, std::size_t n_states, std::size_t n_actions,
                             double gamma) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    std::mt19937_64 g = rng::make_engine(seed, "cmdp-gen", attempt);
    TabularCmdp mdp;
    mdp.n_states = n_states;
    mdp.n_actions = n_actions;
    mdp.gamma = gamma;
    mdp.transitions.resize(n_actions);
    for (std::size_t a = 0; a < n_actions; ++a) {
      mdp.transitions[a].resize(ei(n_states), ei(n_states));
      for (Eigen::Index s = 0; s < ei(n_states); ++s) {
        double row_sum = 0.0;
        for (Eigen::Index t = 0; t < ei(n_states); ++t) {
          const double w = 0.05 + rng::uniform01(g);
          mdp.transitions[a](s, t) = w;
          row_sum += w;
        }
        mdp.transitions[a].row(s) /= row_sum;
      }
    }
    mdp.rewards.resize(ei(n_states), ei(n_actions));
    for (Eigen::Index s = 0; s < ei(n_states); ++s)
      for (Eigen::Index a = 0; a < ei(n_actions); ++a) mdp.rewards(s, a) = rng::uniform(g, 0.0, 5.0);

    mdp.indicators.resize(ei(n_states), 1);
    std::size_t safe_count = 0;
    for (Eigen::Index s = 0; s < ei(n_states); ++s) {
      const bool safe = rng::uniform01(g) < 0.5;
      mdp.indicators(s, 0) = safe ? 1.0 : 0.0;
      safe_count += safe ? 1 : 0;
    }
    if (safe_count == 0 || safe_count == n_states) continue;  // need a mixed safe set

    mdp.initial.resize(ei(n_states));
    double init_sum = 0.0;
    for (Eigen::Index s = 0; s < ei(n_states); ++s) {
      const double w = 0.05 + rng::uniform01(g);
      mdp.initial[s] = w;
      init_sum += w;
    }
    mdp.initial /= init_sum;

    // Place the threshold halfway between the unconstrained optimum's safety
    // value and the best attainable one: Slater holds and the constraint
    // binds, both by construction.
    mdp.c = Eigen::VectorXd::Zero(1);
    const double u_unconstrained = exact_dual(mdp, Eigen::VectorXd::Zero(1)).safety_u[0];
    const double u_max = max_safety_value(mdp, 0);
    if (u_max - u_unconstrained < 0.05) continue;
    mdp.c[0] = u_unconstrained + 0.5 * (u_max - u_unconstrained);
    mdp.validate();
    return mdp;
  }
}

TabularCmdp make_verification_cmdp() {
  // Frozen generation seed; see make_random_cmdp for the rejection rules.
  return make_random_cmdp(2024);
}

}  // namespace saferl
