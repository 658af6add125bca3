#include "saferl/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace saferl {

RbfGrid make_lattice_grid(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          double spacing, double sigma) {
  if (lower.size() != upper.size())
    throw std::invalid_argument("make_lattice_grid: bound dimensions differ");
  if (!(spacing > 0.0)) throw std::invalid_argument("make_lattice_grid: spacing must be > 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("make_lattice_grid: sigma must be > 0");

  const auto dims = static_cast<std::size_t>(lower.size());
  std::vector<std::size_t> counts(dims);
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) {
    if (!(upper[static_cast<Eigen::Index>(d)] >= lower[static_cast<Eigen::Index>(d)]))
      throw std::invalid_argument("make_lattice_grid: upper bound below lower bound");
    const double span = upper[static_cast<Eigen::Index>(d)] - lower[static_cast<Eigen::Index>(d)];
    counts[d] = static_cast<std::size_t>(std::floor(span / spacing + 1e-9)) + 1;
    total *= counts[d];
  }

  RbfGrid grid;
  grid.sigma = sigma;
  grid.centers.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dims));
  std::vector<std::size_t> idx(dims, 0);
  for (std::size_t row = 0; row < total; ++row) {
    for (std::size_t d = 0; d < dims; ++d)
      grid.centers(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(d)) =
          lower[static_cast<Eigen::Index>(d)] + spacing * static_cast<double>(idx[d]);
    for (std::size_t d = dims; d-- > 0;) {
      if (++idx[d] < counts[d]) break;
      idx[d] = 0;
    }
  }
  return grid;
}

Eigen::VectorXd rbf_features(const Eigen::VectorXd& state, const RbfGrid& grid) {
  const double inv_two_sigma_sq = 1.0 / (2.0 * grid.sigma * grid.sigma);
  Eigen::VectorXd phi(grid.centers.rows());
  for (Eigen::Index i = 0; i < grid.centers.rows(); ++i) {
    const double d2 = (state.transpose() - grid.centers.row(i)).squaredNorm();
    phi[i] = std::exp(-d2 * inv_two_sigma_sq);
  }
  return phi;
}

RbfGaussianPolicy::RbfGaussianPolicy(RbfGrid grid, Eigen::VectorXd covariance_diag)
    : RbfGaussianPolicy(std::move(grid),
                        Eigen::MatrixXd(),  // filled below
                        std::move(covariance_diag)) {}

RbfGaussianPolicy::RbfGaussianPolicy(RbfGrid grid, Eigen::MatrixXd theta,
                                     Eigen::VectorXd covariance_diag)
    : grid_(std::move(grid)), theta_(std::move(theta)), cov_diag_(std::move(covariance_diag)) {
  if (grid_.centers.rows() == 0) throw std::invalid_argument("policy: empty RBF grid");
  if (!(grid_.sigma > 0.0)) throw std::invalid_argument("policy: sigma must be > 0");
  if (cov_diag_.size() == 0) throw std::invalid_argument("policy: empty covariance diagonal");
  for (Eigen::Index j = 0; j < cov_diag_.size(); ++j)
    if (!(cov_diag_[j] > 0.0))
      throw std::invalid_argument("policy: covariance diagonal must be strictly positive");
  if (theta_.size() == 0) theta_ = Eigen::MatrixXd::Zero(grid_.centers.rows(), cov_diag_.size());
  if (theta_.rows() != grid_.centers.rows() || theta_.cols() != cov_diag_.size())
    throw std::invalid_argument("policy: theta shape must be num_centers x action_dim");
}

void RbfGaussianPolicy::set_params(Params theta) {
  if (theta.rows() != theta_.rows() || theta.cols() != theta_.cols())
    throw std::invalid_argument("policy: parameter shape mismatch");
  theta_ = std::move(theta);
}

Eigen::VectorXd RbfGaussianPolicy::features(const State& state) const {
  Eigen::VectorXd phi = rbf_features(state, grid_);
  if (feature_cutoff_ > 0.0)
    for (Eigen::Index i = 0; i < phi.size(); ++i)
      if (phi[i] < feature_cutoff_) phi[i] = 0.0;
  return phi;
}

RbfGaussianPolicy::Action RbfGaussianPolicy::mean_action(const State& state) const {
  return theta_.transpose() * features(state);
}

RbfGaussianPolicy::Action RbfGaussianPolicy::sample_action(const State& state,
                                                           std::mt19937_64& g) const {
  Action a = mean_action(state);
  if (mean_only_) return a;
  for (Eigen::Index j = 0; j < a.size(); ++j)
    a[j] += std::sqrt(cov_diag_[j]) * rng::normal(g);
  return a;
}

double RbfGaussianPolicy::log_density(const State& state, const Action& action) const {
  const Action mean = mean_action(state);
  double quad = 0.0;
  double log_det = 0.0;
  for (Eigen::Index j = 0; j < cov_diag_.size(); ++j) {
    const double diff = action[j] - mean[j];
    quad += diff * diff / cov_diag_[j];
    log_det += std::log(cov_diag_[j]);
  }
  const double d = static_cast<double>(cov_diag_.size());
  return -0.5 * (d * std::log(2.0 * M_PI) + log_det + quad);
}

RbfGaussianPolicy::Params RbfGaussianPolicy::score(const State& state,
                                                   const Action& action) const {
  const Eigen::VectorXd phi = features(state);
  Eigen::VectorXd scaled = action - mean_action(state);
  for (Eigen::Index j = 0; j < scaled.size(); ++j) scaled[j] /= cov_diag_[j];
  return phi * scaled.transpose();
}

}  // namespace saferl
