#include "saferl/experiments.hpp"

namespace saferl {

SafetyReport evaluate_outcome(const io::RunConfig& config, const RunOutcome& outcome,
                              std::uint64_t eval_seed) {
  nav::NavEnv env(config.scenario);
  if (config.eval_start_mode == "paper4") env = env.with_starts(config.scenario.eval_starts);
  return estimate_joint_safety(env, outcome.policy,
                               static_cast<std::size_t>(config.training.eval_horizon),
                               static_cast<std::size_t>(config.training.eval_rollouts), eval_seed,
                               config.training.threads);
}

AblationResult ablation_remove_constraint(const io::RunConfig& base, std::size_t index,
                                          const std::vector<std::uint64_t>& seeds) {
  if (index >= base.scenario.obstacles.size())
    throw std::invalid_argument("ablation: constraint index out of range");
  if (seeds.empty()) throw std::invalid_argument("ablation: at least one seed required");

  io::RunConfig removed = base;
  removed.scenario.obstacles.erase(removed.scenario.obstacles.begin() +
                                   static_cast<std::ptrdiff_t>(index));
  removed.scenario.validate();

  AblationResult result;
  result.removed_index = index;
  for (std::uint64_t seed : seeds) {
    io::RunConfig base_run = base;
    base_run.training.seed = seed;
    io::RunConfig removed_run = removed;
    removed_run.training.seed = seed;

    RunOutcome base_outcome = run_training(base_run, std::nullopt);
    RunOutcome removed_outcome = run_training(removed_run, std::nullopt);
    const double base_reward =
        evaluate_outcome(base_run, base_outcome, seed ^ 0x5afe).reward_per_step_mean;
    const double removed_reward =
        evaluate_outcome(removed_run, removed_outcome, seed ^ 0x5afe).reward_per_step_mean;
    result.per_seed_improvement.push_back(removed_reward - base_reward);
  }
  double sum = 0.0;
  for (double v : result.per_seed_improvement) sum += v;
  result.mean_improvement = sum / static_cast<double>(result.per_seed_improvement.size());
  return result;
}

FixedWeightResult fixed_weight_baseline(const io::RunConfig& base, double fixed_lambda) {
  if (fixed_lambda < 0.0)
    throw std::invalid_argument("fixed_weight_baseline: weight must be nonnegative");
  io::RunConfig config = base;
  config.algorithm = io::Algorithm::FixedWeight;
  config.training.fixed_lambda = fixed_lambda;

  RunOutcome outcome = run_training(config, std::nullopt);
  FixedWeightResult result;
  result.final_report = evaluate_outcome(config, outcome, config.training.seed ^ 0x5afe);
  result.trace = std::move(outcome.trace);
  return result;
}

}  // namespace saferl
