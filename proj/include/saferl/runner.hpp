#pragma once

#include <filesystem>
#include <optional>

#include "saferl/evaluation.hpp"
#include "saferl/formats.hpp"

namespace saferl {

struct RunOutcome {
  RbfGaussianPolicy policy;
  Multipliers multipliers;
  std::uint64_t horizon_truncations = 0;
  MemoryTraceSink trace;  // full in-memory copy of the emitted trace
};

// Runs one training job per the resolved configuration. When out_dir is
// given, writes manifest, trace, periodic and final checkpoints there; the
// trace file is flushed row by row so an aborted run keeps its prefix.
RunOutcome run_training(const io::RunConfig& config,
                        const std::optional<std::filesystem::path>& out_dir);

// Reward normalized per step, averaged over the first `count` recorded
// iterations (the trend baseline for improvement checks).
double early_reward_per_step(const MemoryTraceSink& trace, std::size_t count);

// Mean multiplier per constraint over the last quarter of the trace; a more
// stable summary than the final iterate under single-sample dual noise.
Eigen::VectorXd settled_multipliers(const MemoryTraceSink& trace);

}  // namespace saferl
