#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace saferl::cli {

// Flag overrides applied on top of the config file.
struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algorithm;
  std::optional<double> fixed_lambda;
  std::optional<std::int64_t> h_eval;
  std::optional<std::int64_t> rollouts;
  int threads = 1;
};

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const CommonOptions& options);

int cmd_eval(const std::string& checkpoint_path, const std::string& scenario_path,
             std::int64_t h_eval, std::int64_t rollouts, std::uint64_t seed, int threads,
             const std::string& out_path);

int cmd_oracle(const std::string& instance_path, std::size_t resolution, double rel_tolerance);

int cmd_ablate(const std::string& config_path, const std::string& seeds_csv,
               const CommonOptions& options);

}  // namespace saferl::cli
