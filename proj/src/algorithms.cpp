#include "saferl/algorithms.hpp"

namespace saferl {

void TrainConfig::validate() const {
  if (!(eta_theta > 0.0)) throw std::invalid_argument("TrainConfig: eta_theta must be > 0");
  if (!(eta_lambda > 0.0)) throw std::invalid_argument("TrainConfig: eta_lambda must be > 0");
  if (iterations < 0) throw std::invalid_argument("TrainConfig: iterations must be >= 0");
  if (inner_iterations < 1)
    throw std::invalid_argument("TrainConfig: inner_iterations must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (mode == TaskMode::Continuing && (!(gamma > 0.0) || !(gamma < 1.0)))
    throw std::invalid_argument("TrainConfig: gamma must lie in (0,1) for continuing tasks");
  if (mode == TaskMode::Episodic && episodic_horizon < 0)
    throw std::invalid_argument("TrainConfig: episodic horizon must be >= 0");
  if (eval_rollouts > 0 && eval_horizon < 1)
    throw std::invalid_argument("TrainConfig: eval_horizon must be >= 1");
  if (fixed_lambda && *fixed_lambda < 0.0)
    throw std::invalid_argument("TrainConfig: fixed lambda must be nonnegative");
  if (threads < 1) throw std::invalid_argument("TrainConfig: threads must be >= 1");
}

Eigen::VectorXd dual_update(const Eigen::VectorXd& lambda, const Eigen::VectorXd& u_hat,
                            const Eigen::VectorXd& c, double eta_lambda) {
  if (lambda.size() != u_hat.size() || lambda.size() != c.size())
    throw std::invalid_argument("dual_update: dimension mismatch");
  if (!(eta_lambda > 0.0)) throw std::invalid_argument("dual_update: eta_lambda must be > 0");
  return (lambda - eta_lambda * (u_hat - c)).cwiseMax(0.0);
}

}  // namespace saferl
