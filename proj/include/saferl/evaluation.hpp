#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "saferl/mdp_core.hpp"
#include "saferl/rng.hpp"

namespace saferl {

// Monte Carlo safety measurement: for each constraint, the fraction of
// rollouts whose states stay in the safe set at every step t <= h_eval,
// with the per-step normalized reward alongside.
struct SafetyReport {
  Eigen::VectorXd joint_safety;     // empirical joint stay probability per constraint
  Eigen::VectorXd joint_safety_sd;  // sample sd of the per-rollout 0/1 outcomes
  double reward_per_step_mean = 0.0;
  double reward_per_step_sd = 0.0;
  std::size_t n_rollouts = 0;
  std::size_t h_eval = 0;
};

template <Environment E, typename P>
  requires PolicyFor<P, typename E::State, typename E::Action>
SafetyReport estimate_joint_safety(const E& env, const P& policy, std::size_t h_eval,
                                   std::size_t n_rollouts, std::uint64_t seed, int threads = 1) {
  if (h_eval < 1) throw std::invalid_argument("estimate_joint_safety: h_eval must be >= 1");
  if (n_rollouts < 1) throw std::invalid_argument("estimate_joint_safety: n_rollouts must be >= 1");

  const std::size_t m = env.num_constraints();
  std::vector<std::uint8_t> safe(n_rollouts * std::max<std::size_t>(m, 1), 0);
  std::vector<double> reward_per_step(n_rollouts, 0.0);

  auto run_chunk = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      RolloutStreams streams = RolloutStreams::make(seed, 0, j);
      auto traj = rollout(env, policy, h_eval, streams);
      for (std::size_t i = 0; i < m; ++i) {
        bool all_safe = true;
        for (std::size_t t = 0; t < traj.length() && all_safe; ++t)
          all_safe = traj.indicator(t, i);
        safe[j * m + i] = all_safe ? 1 : 0;
      }
      reward_per_step[j] = traj.total_reward() / static_cast<double>(traj.length());
    }
  };

  const int n_threads = std::max(1, threads);
  if (n_threads == 1 || n_rollouts < 2 * static_cast<std::size_t>(n_threads)) {
    run_chunk(0, n_rollouts);
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (n_rollouts + n_threads - 1) / n_threads;
    for (int w = 0; w < n_threads; ++w) {
      const std::size_t begin = static_cast<std::size_t>(w) * chunk;
      const std::size_t end = std::min(n_rollouts, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back(run_chunk, begin, end);
    }
    for (auto& t : workers) t.join();
  }

  SafetyReport report;
  report.n_rollouts = n_rollouts;
  report.h_eval = h_eval;
  report.joint_safety = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  report.joint_safety_sd = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  const double n = static_cast<double>(n_rollouts);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n_rollouts; ++j) sum += safe[j * m + i];
    const double mean = sum / n;
    report.joint_safety[static_cast<Eigen::Index>(i)] = mean;
    if (n_rollouts > 1) {
      double ss = 0.0;
      for (std::size_t j = 0; j < n_rollouts; ++j) {
        const double d = static_cast<double>(safe[j * m + i]) - mean;
        ss += d * d;
      }
      report.joint_safety_sd[static_cast<Eigen::Index>(i)] = std::sqrt(ss / (n - 1.0));
    }
  }
  double r_sum = 0.0;
  for (double r : reward_per_step) r_sum += r;
  report.reward_per_step_mean = r_sum / n;
  if (n_rollouts > 1) {
    double ss = 0.0;
    for (double r : reward_per_step) ss += (r - report.reward_per_step_mean) * (r - report.reward_per_step_mean);
    report.reward_per_step_sd = std::sqrt(ss / (n - 1.0));
  }
  return report;
}

}  // namespace saferl
