#pragma once

#include <vector>

#include "saferl/runner.hpp"

namespace saferl {

struct AblationResult {
  std::size_t removed_index = 0;
  double mean_improvement = 0.0;          // final-eval reward-per-step gain over the base run
  std::vector<double> per_seed_improvement;
};

// Retrains with constraint `index` removed (its obstacle stays in the world
// but stops being penalized) and reports the reward improvement over the
// base run, averaged over the given seeds.
AblationResult ablation_remove_constraint(const io::RunConfig& base, std::size_t index,
                                          const std::vector<std::uint64_t>& seeds);

struct FixedWeightResult {
  MemoryTraceSink trace;
  SafetyReport final_report;
};

// Trains with the dual update disabled and every multiplier frozen at the
// given value, then evaluates the resulting policy.
FixedWeightResult fixed_weight_baseline(const io::RunConfig& base, double fixed_lambda);

// Final evaluation of an outcome under the run's evaluation protocol
// (re-computed so callers do not depend on trace eval blocks being present).
SafetyReport evaluate_outcome(const io::RunConfig& config, const RunOutcome& outcome,
                              std::uint64_t eval_seed);

}  // namespace saferl
