#include "saferl/commands.hpp"

#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "saferl/experiments.hpp"
#include "saferl/runner.hpp"
#include "saferl/trace.hpp"

namespace saferl::cli {

using nlohmann::json;

namespace {

io::RunConfig load_config_with_overrides(const std::string& config_path,
                                         const CommonOptions& options) {
  io::RunConfig config = io::load_run_config(config_path);
  if (options.seed) config.training.seed = *options.seed;
  if (options.algorithm) config.algorithm = io::algorithm_from_string(*options.algorithm);
  if (options.fixed_lambda) config.training.fixed_lambda = *options.fixed_lambda;
  if (options.h_eval) config.training.eval_horizon = *options.h_eval;
  if (options.rollouts) config.training.eval_rollouts = *options.rollouts;
  config.training.threads = options.threads;
  if (config.algorithm == io::Algorithm::FixedWeight && !config.training.fixed_lambda)
    throw std::runtime_error("fixed-weight algorithm requires --fixed-lambda or a config value");
  if (config.algorithm != io::Algorithm::FixedWeight) config.training.fixed_lambda.reset();
  return config;
}

json report_to_json(const SafetyReport& report) {
  json doc;
  doc["n_rollouts"] = report.n_rollouts;
  doc["h_eval"] = report.h_eval;
  doc["joint_safety"] = json::array();
  doc["joint_safety_sd"] = json::array();
  for (Eigen::Index i = 0; i < report.joint_safety.size(); ++i) {
    doc["joint_safety"].push_back(report.joint_safety[i]);
    doc["joint_safety_sd"].push_back(report.joint_safety_sd[i]);
  }
  doc["reward_per_step_mean"] = report.reward_per_step_mean;
  doc["reward_per_step_sd"] = report.reward_per_step_sd;
  return doc;
}

}  // namespace

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const CommonOptions& options) {
  try {
    io::RunConfig config = load_config_with_overrides(config_path, options);
    RunOutcome outcome = run_training(config, std::filesystem::path(out_dir));
    std::cout << "iterations=" << config.training.iterations << "\n";
    std::cout << "horizon_truncations=" << outcome.horizon_truncations << "\n";
    for (Eigen::Index i = 0; i < outcome.multipliers.values().size(); ++i)
      std::cout << "lambda_" << (i + 1) << "=" << format_double(outcome.multipliers.values()[i])
                << "\n";
    std::cout << "trace=" << (std::filesystem::path(out_dir) / "trace.csv").string() << "\n";
    return 0;
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << " (partial trace preserved)\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_eval(const std::string& checkpoint_path, const std::string& scenario_path,
             std::int64_t h_eval, std::int64_t rollouts, std::uint64_t seed, int threads,
             const std::string& out_path) {
  try {
    RbfGaussianPolicy policy = io::load_checkpoint(checkpoint_path);
    nav::NavScenario scenario =
        scenario_path.empty() ? nav::default_scenario() : io::load_scenario(scenario_path);
    nav::NavEnv env = nav::NavEnv(scenario).with_starts(scenario.eval_starts);
    SafetyReport report =
        estimate_joint_safety(env, policy, static_cast<std::size_t>(h_eval),
                              static_cast<std::size_t>(rollouts), seed, threads);

    json doc = report_to_json(report);
    doc["checkpoint"] = checkpoint_path;
    doc["scenario"] = scenario_path.empty() ? "<built-in default>" : scenario_path;
    doc["seed"] = seed;
    for (std::size_t i = 0; i < scenario.obstacles.size(); ++i)
      doc["labels"].push_back(scenario.obstacles[i].label);

    if (out_path.empty()) {
      std::cout << doc.dump(2) << "\n";
    } else {
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
      out << doc.dump(2) << "\n";
    }
    return 0;
  } catch (const io::VersionMismatch& e) {
    std::cerr << "error: incompatible file version: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_oracle(const std::string& instance_path, std::size_t resolution, double rel_tolerance) {
  try {
    TabularCmdp mdp = io::load_cmdp(instance_path);

    // Infeasible thresholds are reported cleanly rather than as an error.
    const double u_ceiling = 1.0 / (1.0 - mdp.gamma);
    for (Eigen::Index i = 0; i < mdp.c.size(); ++i) {
      if (mdp.c[i] > u_ceiling) {
        std::cout << "status=infeasible\n";
        std::cout << "reason=threshold_" << (i + 1) << " exceeds 1/(1-gamma)="
                  << format_double(u_ceiling) << "\n";
        return 0;
      }
    }

    DualityGapReport report = duality_gap(mdp, resolution);
    if (report.status == GapStatus::NoSlaterPoint) {
      std::cout << "status=no-slater-point\n";
      return 0;
    }
    const double rel_gap = std::abs(report.gap) /
                           std::max(std::abs(report.primal_optimum), 1e-12);
    std::cout << "status=verified\n";
    std::cout << "D_star=" << format_double(report.dual_optimum) << "\n";
    std::cout << "P_star=" << format_double(report.primal_optimum) << "\n";
    std::cout << "gap=" << format_double(report.gap) << "\n";
    std::cout << "rel_gap=" << format_double(rel_gap) << "\n";
    for (Eigen::Index i = 0; i < report.lambda_star.size(); ++i)
      std::cout << "lambda_star_" << (i + 1) << "=" << format_double(report.lambda_star[i]) << "\n";
    std::cout << "tolerance=" << format_double(rel_tolerance) << "\n";
    std::cout << "result=" << (rel_gap <= rel_tolerance ? "PASS" : "FAIL") << "\n";
    return rel_gap <= rel_tolerance ? 0 : 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_ablate(const std::string& config_path, const std::string& seeds_csv,
               const CommonOptions& options) {
  try {
    io::RunConfig config = load_config_with_overrides(config_path, options);
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(seeds_csv);
    std::string token;
    while (std::getline(ss, token, ',')) seeds.push_back(std::stoull(token));
    if (seeds.empty()) throw std::runtime_error("ablate: no seeds given");

    for (std::size_t i = 0; i < config.scenario.obstacles.size(); ++i) {
      AblationResult result = ablation_remove_constraint(config, i, seeds);
      std::cout << "constraint=" << config.scenario.obstacles[i].label
                << " mean_improvement=" << format_double(result.mean_improvement);
      std::cout << " per_seed=";
      for (std::size_t j = 0; j < result.per_seed_improvement.size(); ++j)
        std::cout << (j ? ";" : "") << format_double(result.per_seed_improvement[j]);
      std::cout << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace saferl::cli
