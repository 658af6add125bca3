#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "saferl/rng.hpp"

namespace saferl {

// Radial-basis feature layout: Gaussian bumps of common bandwidth sigma at a
// fixed list of centers inside the state bounds.
struct RbfGrid {
  Eigen::MatrixXd centers;  // num_centers x state_dim
  double sigma = 0.5;

  std::size_t num_centers() const { return static_cast<std::size_t>(centers.rows()); }
  std::size_t state_dim() const { return static_cast<std::size_t>(centers.cols()); }
};

// Uniform lattice over an axis-aligned box, inclusive of both boundary
// values when the spacing divides the side length.
RbfGrid make_lattice_grid(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          double spacing, double sigma);

// phi_i(s) = exp(-||s - center_i||^2 / (2 sigma^2)); every component lies in
// (0,1] and decreases with the distance to its center.
Eigen::VectorXd rbf_features(const Eigen::VectorXd& state, const RbfGrid& grid);

// Gaussian policy whose mean is a linear combination of RBF features:
// a ~ Normal(theta^T phi(s), Sigma) with fixed diagonal Sigma. Only the mean
// parameters theta are learned.
class RbfGaussianPolicy {
 public:
  using State = Eigen::VectorXd;
  using Action = Eigen::VectorXd;
  using Params = Eigen::MatrixXd;

  RbfGaussianPolicy(RbfGrid grid, Eigen::VectorXd covariance_diag);
  RbfGaussianPolicy(RbfGrid grid, Eigen::MatrixXd theta, Eigen::VectorXd covariance_diag);

  const RbfGrid& grid() const { return grid_; }
  const Eigen::MatrixXd& theta() const { return theta_; }
  const Eigen::VectorXd& covariance_diag() const { return cov_diag_; }
  std::size_t action_dim() const { return static_cast<std::size_t>(cov_diag_.size()); }

  const Params& params() const { return theta_; }
  void set_params(Params theta);

  // Features below the cutoff are treated as exactly zero. Zero (the
  // default) evaluates every center.
  void set_feature_cutoff(double cutoff) { feature_cutoff_ = cutoff; }
  double feature_cutoff() const { return feature_cutoff_; }

  // Test mode: sample_action returns the mean and consumes no randomness.
  void set_mean_only(bool on) { mean_only_ = on; }

  Eigen::VectorXd features(const State& state) const;
  Action mean_action(const State& state) const;
  Action sample_action(const State& state, std::mt19937_64& g) const;
  double log_density(const State& state, const Action& action) const;

  // Gradient of log pi(action|state) with respect to theta:
  // outer(phi(state), Sigma^{-1} (action - mean)).
  Params score(const State& state, const Action& action) const;

 private:
  RbfGrid grid_;
  Eigen::MatrixXd theta_;     // num_centers x action_dim
  Eigen::VectorXd cov_diag_;  // action_dim, strictly positive
  double feature_cutoff_ = 0.0;
  bool mean_only_ = false;
};

}  // namespace saferl
