#pragma once

#include <filesystem>
#include <string>

#include "saferl/algorithms.hpp"
#include "saferl/nav_env.hpp"
#include "saferl/policy.hpp"
#include "saferl/tabular.hpp"

namespace saferl::io {

inline constexpr int kScenarioFormatVersion = 1;
inline constexpr int kConfigFormatVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr int kCmdpFormatVersion = 1;
inline constexpr const char* kArtifactVersion = "0.1.0";

// Raised when a document's format_version does not match what this build
// writes; distinct from generic parse failures so callers can report
// incompatibility explicitly.
class VersionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { StochasticPrimalDual, DualDescent, FixedWeight };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

// Policy hyperparameters resolved against the scenario's domain box.
struct PolicySettings {
  double spacing = 0.5;
  double sigma = 0.5;
  Eigen::VectorXd covariance_diag = Eigen::Vector2d(0.5, 0.5);
  double feature_cutoff = 0.0;
};

struct RunConfig {
  std::string scenario_path;  // empty: built-in default scenario
  nav::NavScenario scenario;  // resolved
  TrainConfig training;
  PolicySettings policy;
  Algorithm algorithm = Algorithm::StochasticPrimalDual;
  std::string eval_start_mode = "paper4";  // "paper4" | "training"
};

// Loaders reject unknown keys and anchor every complaint to a JSON pointer
// path. Scenario files: domain, goal, obstacles with per-obstacle constraint
// parameters, start distributions.
nav::NavScenario load_scenario(const std::filesystem::path& path);
void save_scenario(const nav::NavScenario& scenario, const std::filesystem::path& path);

RunConfig load_run_config(const std::filesystem::path& path);

TabularCmdp load_cmdp(const std::filesystem::path& path);
void save_cmdp(const TabularCmdp& mdp, const std::filesystem::path& path,
               const std::string& note = "");

void save_checkpoint(const RbfGaussianPolicy& policy, const std::filesystem::path& path);
RbfGaussianPolicy load_checkpoint(const std::filesystem::path& path);

// Resolves the per-obstacle constraint parameters into ConstraintSpecs for
// the given task mode.
std::vector<ConstraintSpec> resolve_constraints(const nav::NavScenario& scenario,
                                                const TrainConfig& training);

RbfGaussianPolicy build_policy(const nav::NavScenario& scenario, const PolicySettings& settings);

// Reproduction manifest: resolved configuration, seed, and format versions.
void write_manifest(const RunConfig& config, const std::vector<ConstraintSpec>& specs,
                    const std::filesystem::path& path);

}  // namespace saferl::io
