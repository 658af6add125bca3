#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "saferl/policy.hpp"
#include "support/test_support.hpp"

using namespace saferl;

namespace {

RbfGrid tiny_grid() {
  RbfGrid grid;
  grid.sigma = 0.5;
  grid.centers.resize(3, 2);
  grid.centers << 0.0, 0.0, 1.0, 0.0, 0.0, 1.0;
  return grid;
}

RbfGaussianPolicy random_policy(std::uint64_t seed, std::size_t centers = 6) {
  auto g = rng::make_engine(seed, "policy-gen");
  RbfGrid grid;
  grid.sigma = 0.4 + rng::uniform01(g);
  grid.centers.resize(static_cast<Eigen::Index>(centers), 2);
  for (Eigen::Index i = 0; i < grid.centers.rows(); ++i)
    for (Eigen::Index d = 0; d < 2; ++d) grid.centers(i, d) = rng::uniform(g, 0.0, 5.0);
  Eigen::MatrixXd theta(static_cast<Eigen::Index>(centers), 2);
  for (Eigen::Index i = 0; i < theta.rows(); ++i)
    for (Eigen::Index j = 0; j < 2; ++j) theta(i, j) = rng::uniform(g, -2.0, 2.0);
  Eigen::VectorXd cov(2);
  cov << 0.3 + rng::uniform01(g), 0.3 + rng::uniform01(g);
  return RbfGaussianPolicy(std::move(grid), std::move(theta), std::move(cov));
}

}  // namespace

TEST_CASE("lattice grid covers both boundaries at the paper spacings") {
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.0, 0.0;
  hi << 10.0, 10.0;
  CHECK(make_lattice_grid(lo, hi, 0.25, 0.5).num_centers() == 1681);  // 41 x 41
  RbfGrid coarse = make_lattice_grid(lo, hi, 0.5, 0.5);
  CHECK(coarse.num_centers() == 441);  // 21 x 21
  CHECK(coarse.centers.row(0).isApprox(Eigen::RowVector2d(0.0, 0.0)));
  CHECK(coarse.centers.row(440).isApprox(Eigen::RowVector2d(10.0, 10.0)));
}

TEST_CASE("feature at its own center is exactly 1") {
  RbfGrid grid = tiny_grid();
  Eigen::VectorXd phi = rbf_features(grid.centers.row(1).transpose(), grid);
  CHECK(phi[1] == 1.0);
  CHECK(phi[0] < 1.0);
}

TEST_CASE("mirror-symmetric states share the feature value at the mirror center") {
  RbfGrid grid = tiny_grid();
  Eigen::VectorXd left(2), right(2);
  left << -0.3, 0.0;
  right << 0.3, 0.0;  // symmetric about center 0 at the origin
  CHECK(rbf_features(left, grid)[0] == doctest::Approx(rbf_features(right, grid)[0]).epsilon(1e-15));
}

TEST_CASE("feature value matches direct arithmetic at distance 0.25, sigma 0.5") {
  RbfGrid grid;
  grid.sigma = 0.5;
  grid.centers.resize(1, 2);
  grid.centers << 0.0, 0.0;
  Eigen::VectorXd state(2);
  state << 0.25, 0.0;
  const double phi = rbf_features(state, grid)[0];
  CHECK(phi == doctest::Approx(std::exp(-0.125)).epsilon(1e-12));
  CHECK(phi == doctest::Approx(0.88250).epsilon(1e-4));
}

TEST_CASE("features lie in (0,1] and decay with distance") {
  RbfGrid grid = tiny_grid();
  auto g = rng::make_engine(11, "feat");
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd s(2);
    s << rng::uniform(g, -3.0, 3.0), rng::uniform(g, -3.0, 3.0);
    Eigen::VectorXd phi = rbf_features(s, grid);
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      CHECK(phi[i] > 0.0);
      CHECK(phi[i] <= 1.0);
      // Stepping directly away from the center shrinks the feature.
      Eigen::VectorXd away = s + 0.5 * (s - grid.centers.row(i).transpose()).normalized();
      if ((s - grid.centers.row(i).transpose()).norm() > 1e-9)
        CHECK(rbf_features(away, grid)[i] < phi[i]);
    }
  }
}

TEST_CASE("mean action with all-zero theta is the zero vector") {
  RbfGaussianPolicy policy(tiny_grid(), Eigen::Vector2d(0.5, 0.5));
  Eigen::VectorXd s(2);
  s << 0.3, 0.7;
  CHECK(policy.mean_action(s).norm() == 0.0);
}

TEST_CASE("single-center mean is the feature times the theta row") {
  RbfGrid grid;
  grid.sigma = 0.5;
  grid.centers.resize(1, 2);
  grid.centers << 1.0, 1.0;
  Eigen::MatrixXd theta(1, 2);
  theta << 1.0, 0.0;
  RbfGaussianPolicy policy(grid, theta, Eigen::Vector2d(0.5, 0.5));
  Eigen::VectorXd s(2);
  s << 1.5, 1.0;
  const double f = rbf_features(s, grid)[0];
  Eigen::VectorXd mean = policy.mean_action(s);
  CHECK(mean[0] == doctest::Approx(f).epsilon(1e-15));
  CHECK(mean[1] == 0.0);
}

TEST_CASE("mean action agrees with a naive double-loop summation") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    RbfGaussianPolicy policy = random_policy(seed);
    auto g = rng::make_engine(seed, "state");
    Eigen::VectorXd s(2);
    s << rng::uniform(g, 0.0, 5.0), rng::uniform(g, 0.0, 5.0);

    Eigen::VectorXd mean = policy.mean_action(s);

    // Independent re-summation with scalar loops.
    const auto& grid = policy.grid();
    for (Eigen::Index j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < grid.centers.rows(); ++i) {
        double d2 = 0.0;
        for (Eigen::Index d = 0; d < 2; ++d) {
          const double diff = s[d] - grid.centers(i, d);
          d2 += diff * diff;
        }
        acc += policy.theta()(i, j) * std::exp(-d2 / (2.0 * grid.sigma * grid.sigma));
      }
      CHECK(mean[j] == doctest::Approx(acc).epsilon(1e-12));
    }
  }
}

TEST_CASE("mean-only mode returns the mean exactly") {
  RbfGaussianPolicy policy = random_policy(17);
  policy.set_mean_only(true);
  auto g = rng::make_engine(17, "sample");
  Eigen::VectorXd s(2);
  s << 2.0, 2.0;
  CHECK((policy.sample_action(s, g) - policy.mean_action(s)).norm() == 0.0);
}

TEST_CASE("sample variance matches the diagonal covariance 0.5") {
  RbfGaussianPolicy policy(tiny_grid(), Eigen::Vector2d(0.5, 0.5));
  auto g = rng::make_engine(31, "var");
  Eigen::VectorXd s(2);
  s << 0.2, 0.4;
  const Eigen::VectorXd mean = policy.mean_action(s);
  const int n = 1'000'000;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  Eigen::Vector2d sumsq = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd a = policy.sample_action(s, g);
    sum += a;
    sumsq += a.cwiseProduct(a);
  }
  for (int j = 0; j < 2; ++j) {
    const double m = sum[j] / n;
    const double var = sumsq[j] / n - m * m;
    // SE of a normal's sample variance: var * sqrt(2/(n-1)).
    const double se_var = 0.5 * std::sqrt(2.0 / (n - 1.0));
    CHECK(std::abs(var - 0.5) < 3.0 * se_var);
    const double se_mean = std::sqrt(0.5 / n);
    CHECK(std::abs(m - mean[j]) < 3.0 * se_mean);
  }
}

TEST_CASE("log density at the mean matches the closed-form normalizer") {
  RbfGaussianPolicy policy(tiny_grid(), Eigen::Vector2d(0.5, 0.5));
  Eigen::VectorXd s(2);
  s << 0.1, 0.2;
  const Eigen::VectorXd mean = policy.mean_action(s);
  CHECK(policy.log_density(s, mean) == doctest::Approx(-std::log(M_PI)).epsilon(1e-12));
}

TEST_CASE("density integrates to one over a 6-sigma box") {
  RbfGaussianPolicy policy = random_policy(5);
  Eigen::VectorXd s(2);
  s << 1.0, 2.0;
  const Eigen::VectorXd mean = policy.mean_action(s);
  const Eigen::VectorXd sd = policy.covariance_diag().cwiseSqrt();

  // Midpoint quadrature on a 6-sigma box around the mean.
  const int n_grid = 400;
  double integral = 0.0;
  for (int ix = 0; ix < n_grid; ++ix) {
    for (int iy = 0; iy < n_grid; ++iy) {
      Eigen::VectorXd a(2);
      a[0] = mean[0] + 6.0 * sd[0] * ((ix + 0.5) / n_grid * 2.0 - 1.0);
      a[1] = mean[1] + 6.0 * sd[1] * ((iy + 0.5) / n_grid * 2.0 - 1.0);
      integral += std::exp(policy.log_density(s, a));
    }
  }
  integral *= (12.0 * sd[0] / n_grid) * (12.0 * sd[1] / n_grid);
  CHECK(std::abs(integral - 1.0) < 1e-3);
}

TEST_CASE("shifting action and mean together leaves the log density unchanged") {
  RbfGrid grid;
  grid.sigma = 0.5;
  grid.centers.resize(1, 2);
  grid.centers << 1.0, 1.0;
  Eigen::MatrixXd theta(1, 2);
  theta << 0.7, -0.4;
  RbfGaussianPolicy policy(grid, theta, Eigen::Vector2d(0.5, 0.8));

  // At the center the feature is exactly 1, so adding v to the theta row
  // shifts the mean by exactly v.
  Eigen::VectorXd s = grid.centers.row(0).transpose();
  Eigen::VectorXd a(2);
  a << 0.4, 0.1;
  Eigen::Vector2d v(1.3, -2.2);
  const double base = policy.log_density(s, a);

  Eigen::MatrixXd shifted = theta;
  shifted.row(0) += v.transpose();
  RbfGaussianPolicy policy2(grid, shifted, Eigen::Vector2d(0.5, 0.8));
  CHECK(policy2.log_density(s, a + v) == doctest::Approx(base).epsilon(1e-14));
}

TEST_CASE("score vanishes when the action equals the mean") {
  RbfGaussianPolicy policy = random_policy(23);
  Eigen::VectorXd s(2);
  s << 0.5, 1.5;
  CHECK(policy.score(s, policy.mean_action(s)).norm() == 0.0);
}

TEST_CASE("doubling the covariance halves the score") {
  RbfGaussianPolicy policy = random_policy(29);
  Eigen::VectorXd s(2), a(2);
  s << 1.0, 0.5;
  a << 0.3, -0.2;
  RbfGaussianPolicy doubled(policy.grid(), policy.theta(), 2.0 * policy.covariance_diag());
  CHECK((doubled.score(s, a) - 0.5 * policy.score(s, a)).norm() < 1e-14);
}

TEST_CASE("score matches central finite differences of the log density") {
  const double h = 1e-5;
  RbfGaussianPolicy policy = random_policy(101, 4);
  auto g = rng::make_engine(101, "fd");
  Eigen::VectorXd s(2), a(2);
  s << rng::uniform(g, 0.0, 5.0), rng::uniform(g, 0.0, 5.0);
  a << rng::uniform(g, -2.0, 2.0), rng::uniform(g, -2.0, 2.0);

  const Eigen::MatrixXd analytic = policy.score(s, a);
  for (Eigen::Index i = 0; i < policy.theta().rows(); ++i) {
    for (Eigen::Index j = 0; j < policy.theta().cols(); ++j) {
      Eigen::MatrixXd up = policy.theta(), dn = policy.theta();
      up(i, j) += h;
      dn(i, j) -= h;
      RbfGaussianPolicy p_up(policy.grid(), up, policy.covariance_diag());
      RbfGaussianPolicy p_dn(policy.grid(), dn, policy.covariance_diag());
      const double fd = (p_up.log_density(s, a) - p_dn.log_density(s, a)) / (2.0 * h);
      CHECK(std::abs(fd - analytic(i, j)) < 1e-5);
    }
  }
}

TEST_CASE("finite-difference agreement holds over 100 random triples at 1e-4 relative") {
  const double h = 1e-5;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    RbfGaussianPolicy policy = random_policy(1000 + trial, 3);
    auto g = rng::make_engine(trial, "fd-many");
    Eigen::VectorXd s(2), a(2);
    s << rng::uniform(g, 0.0, 5.0), rng::uniform(g, 0.0, 5.0);
    a << rng::uniform(g, -3.0, 3.0), rng::uniform(g, -3.0, 3.0);
    const Eigen::MatrixXd analytic = policy.score(s, a);
    for (Eigen::Index i = 0; i < policy.theta().rows(); ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) {
        Eigen::MatrixXd up = policy.theta(), dn = policy.theta();
        up(i, j) += h;
        dn(i, j) -= h;
        RbfGaussianPolicy p_up(policy.grid(), up, policy.covariance_diag());
        RbfGaussianPolicy p_dn(policy.grid(), dn, policy.covariance_diag());
        const double fd = (p_up.log_density(s, a) - p_dn.log_density(s, a)) / (2.0 * h);
        const double scale = std::max(std::abs(analytic(i, j)), 1e-3);
        CHECK(std::abs(fd - analytic(i, j)) / scale < 1e-4);
      }
    }
  }
}

TEST_CASE("log density is maximized over actions at the mean") {
  RbfGaussianPolicy policy = random_policy(41);
  auto g = rng::make_engine(41, "perturb");
  Eigen::VectorXd s(2);
  s << 2.0, 1.0;
  const Eigen::VectorXd mean = policy.mean_action(s);
  const double at_mean = policy.log_density(s, mean);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd d(2);
    d << rng::uniform(g, -0.5, 0.5), rng::uniform(g, -0.5, 0.5);
    if (d.norm() < 1e-9) continue;
    CHECK(policy.log_density(s, mean + d) < at_mean);
  }
}

TEST_CASE("policy constructor rejects broken invariants") {
  CHECK_THROWS_AS(RbfGaussianPolicy(tiny_grid(), Eigen::Vector2d(0.5, 0.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(RbfGaussianPolicy(tiny_grid(), Eigen::Vector2d(0.5, -1.0)),
                  std::invalid_argument);
  RbfGrid empty;
  empty.sigma = 0.5;
  empty.centers.resize(0, 2);
  CHECK_THROWS_AS(RbfGaussianPolicy(empty, Eigen::Vector2d(0.5, 0.5)), std::invalid_argument);
  Eigen::MatrixXd bad_theta(2, 2);
  bad_theta.setZero();
  CHECK_THROWS_AS(RbfGaussianPolicy(tiny_grid(), bad_theta, Eigen::Vector2d(0.5, 0.5)),
                  std::invalid_argument);
}
