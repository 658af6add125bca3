#include "saferl/runner.hpp"

#include <cstdio>
#include <fstream>
#include <memory>

namespace saferl {

RunOutcome run_training(const io::RunConfig& config,
                        const std::optional<std::filesystem::path>& out_dir) {
  const std::vector<ConstraintSpec> specs =
      io::resolve_constraints(config.scenario, config.training);
  nav::NavEnv env(config.scenario);
  RbfGaussianPolicy policy = io::build_policy(config.scenario, config.policy);

  std::optional<nav::NavEnv> eval_env;
  if (config.eval_start_mode == "paper4") eval_env = env.with_starts(config.scenario.eval_starts);

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    io::write_manifest(config, specs, *out_dir / "manifest.json");
    io::save_checkpoint(policy, *out_dir / "ckpt_initial.json");
  }

  RunOutcome outcome{policy, Multipliers(specs.size()), 0, {}};
  std::ofstream trace_file;
  std::unique_ptr<CsvTraceSink> csv;
  std::vector<TraceSink*> sinks{&outcome.trace};
  if (out_dir) {
    trace_file.open(*out_dir / "trace.csv");
    if (!trace_file) throw std::runtime_error("cannot open trace file in " + out_dir->string());
    csv = std::make_unique<CsvTraceSink>(trace_file, specs.size());
    sinks.push_back(csv.get());
  }
  TeeTraceSink sink(sinks);

  std::function<void(const RbfGaussianPolicy&, std::int64_t)> checkpoint_cb;
  if (out_dir) {
    checkpoint_cb = [&](const RbfGaussianPolicy& p, std::int64_t iteration) {
      char name[64];
      std::snprintf(name, sizeof(name), "ckpt_%08lld.json", static_cast<long long>(iteration));
      io::save_checkpoint(p, *out_dir / name);
    };
  }

  const nav::NavEnv* eval_ptr = eval_env ? &*eval_env : nullptr;
  try {
    switch (config.algorithm) {
      case io::Algorithm::StochasticPrimalDual:
      case io::Algorithm::FixedWeight: {
        auto result = run_stochastic_primal_dual(env, policy, specs, config.training, sink,
                                                 eval_ptr, checkpoint_cb);
        outcome.policy = std::move(result.policy);
        outcome.multipliers = std::move(result.multipliers);
        outcome.horizon_truncations = result.horizon_truncations;
        break;
      }
      case io::Algorithm::DualDescent: {
        auto result =
            run_dual_descent(env, policy, specs, config.training, sink, eval_ptr, checkpoint_cb);
        outcome.policy = std::move(result.policy);
        outcome.multipliers = std::move(result.multipliers);
        outcome.horizon_truncations = result.horizon_truncations;
        break;
      }
    }
  } catch (const TrainingDiverged&) {
    trace_file.flush();  // keep the partial trace
    throw;
  }

  if (out_dir) io::save_checkpoint(outcome.policy, *out_dir / "ckpt_final.json");
  return outcome;
}

double early_reward_per_step(const MemoryTraceSink& trace, std::size_t count) {
  const std::size_t n = std::min(count, trace.steps.size());
  if (n == 0) throw std::invalid_argument("early_reward_per_step: empty trace");
  double reward_sum = 0.0;
  double step_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    reward_sum += trace.steps[k].plain_return;
    step_sum += trace.steps[k].steps;
  }
  return reward_sum / step_sum;
}

Eigen::VectorXd settled_multipliers(const MemoryTraceSink& trace) {
  if (trace.steps.empty()) throw std::invalid_argument("settled_multipliers: empty trace");
  const std::size_t start = trace.steps.size() - trace.steps.size() / 4 - 1;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(trace.steps.back().lambda.size());
  std::size_t count = 0;
  for (std::size_t k = start; k < trace.steps.size(); ++k) {
    sum += trace.steps[k].lambda;
    ++count;
  }
  return sum / static_cast<double>(count);
}

}  // namespace saferl
