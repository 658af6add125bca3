#include <CLI11.hpp>
#include <cstdint>
#include <string>

#include "saferl/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"saferl: constrained policy search with probabilistic safety certificates"};
  app.require_subcommand(1);

  saferl::cli::CommonOptions options;
  std::string config_path;
  std::string out_dir = "run";
  std::uint64_t seed_flag = 0;
  std::string algorithm_flag;
  double fixed_lambda_flag = -1.0;
  std::int64_t h_eval_flag = -1;
  std::int64_t rollouts_flag = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_flag, "Override the master seed");
    cmd->add_option("--algorithm", algorithm_flag,
                    "stochastic-primal-dual | dual-descent | fixed-weight");
    cmd->add_option("--fixed-lambda", fixed_lambda_flag,
                    "Multiplier value for the fixed-weight algorithm");
    cmd->add_option("--h-eval", h_eval_flag, "Evaluation horizon override");
    cmd->add_option("--rollouts", rollouts_flag, "Evaluation rollout count override");
    cmd->add_option("--threads", options.threads, "Evaluation fan-out thread cap");
  };

  CLI::App* train = app.add_subcommand("train", "Train a policy and write trace/checkpoints");
  train->add_option("--config", config_path, "Run configuration file")->required();
  train->add_option("--out", out_dir, "Output directory");
  add_common(train);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint's safety and reward");
  std::string checkpoint_path, scenario_path, report_path;
  std::int64_t eval_h = 100, eval_n = 500;
  std::uint64_t eval_seed = 0;
  eval->add_option("--checkpoint", checkpoint_path, "Policy checkpoint file")->required();
  eval->add_option("--scenario", scenario_path, "Scenario file (default: built-in)");
  eval->add_option("--h-eval", eval_h, "Evaluation horizon");
  eval->add_option("--rollouts", eval_n, "Number of evaluation rollouts");
  eval->add_option("--seed", eval_seed, "Evaluation seed");
  eval->add_option("--threads", options.threads, "Evaluation fan-out thread cap");
  eval->add_option("--out", report_path, "Write the report here instead of stdout");

  CLI::App* oracle = app.add_subcommand("oracle", "Duality-gap verification on a tabular instance");
  std::string instance_path;
  std::size_t resolution = 200;
  double tolerance = 0.05;
  oracle->add_option("--instance", instance_path, "Tabular instance file")->required();
  oracle->add_option("--resolution", resolution, "Brute-force simplex grid resolution");
  oracle->add_option("--tolerance", tolerance, "Relative gap tolerance for PASS");

  CLI::App* ablate = app.add_subcommand("ablate", "Constraint-removal reward improvements");
  std::string seeds_csv = "1,2,3";
  ablate->add_option("--config", config_path, "Run configuration file")->required();
  ablate->add_option("--seeds", seeds_csv, "Comma-separated seeds");
  add_common(ablate);

  CLI11_PARSE(app, argc, argv);

  auto finish_common = [&](const CLI::App* cmd) {
    if (cmd->count("--seed")) options.seed = seed_flag;
    if (cmd->count("--algorithm")) options.algorithm = algorithm_flag;
    if (cmd->count("--fixed-lambda")) options.fixed_lambda = fixed_lambda_flag;
    if (cmd->count("--h-eval")) options.h_eval = h_eval_flag;
    if (cmd->count("--rollouts")) options.rollouts = rollouts_flag;
  };

  if (train->parsed()) {
    finish_common(train);
    return saferl::cli::cmd_train(config_path, out_dir, options);
  }
  if (eval->parsed())
    return saferl::cli::cmd_eval(checkpoint_path, scenario_path, eval_h, eval_n, eval_seed,
                                 options.threads, report_path);
  if (oracle->parsed()) return saferl::cli::cmd_oracle(instance_path, resolution, tolerance);
  if (ablate->parsed()) {
    finish_common(ablate);
    return saferl::cli::cmd_ablate(config_path, seeds_csv, options);
  }
  return 1;
}
