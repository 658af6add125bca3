#include <doctest.h>

#include <cmath>
#include <vector>

#include "saferl/constraints.hpp"
#include "saferl/rng.hpp"

using namespace saferl;

TEST_CASE("episodic slack formula: delta 0.1, T 9") {
  auto [eps, c] = slack_episodic(0.1, 9);
  CHECK(eps == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(c == doctest::Approx(0.99).epsilon(1e-15));
}

TEST_CASE("episodic slack at T=0 collapses to no slack") {
  auto [eps, c] = slack_episodic(0.25, 0);
  CHECK(eps == 0.0);
  CHECK(c == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("episodic slack: delta 0.001, T 99") {
  auto [eps, c] = slack_episodic(0.001, 99);
  CHECK(eps == doctest::Approx(0.00099).epsilon(1e-12));
  CHECK(c == doctest::Approx(0.99999).epsilon(1e-12));
}

TEST_CASE("episodic threshold is increasing in T and decreasing in delta") {
  double prev_c = 0.0;
  for (std::int64_t t = 0; t < 50; ++t) {
    const double c = slack_episodic(0.1, t).threshold;
    CHECK(c > prev_c);
    prev_c = c;
  }
  prev_c = 2.0;
  for (double delta : {0.01, 0.05, 0.1, 0.5, 0.9}) {
    const double c = slack_episodic(delta, 10).threshold;
    CHECK(c < prev_c);
    prev_c = c;
  }
}

TEST_CASE("discounted slack at t_safe=0") {
  const double delta = 0.2, gamma = 0.9;
  auto [eps, c] = slack_discounted(delta, gamma, 0);
  CHECK(eps == doctest::Approx(delta * gamma).epsilon(1e-15));
  CHECK(c == doctest::Approx((1.0 - delta * (1.0 - gamma)) / (1.0 - gamma)).epsilon(1e-15));
}

TEST_CASE("discounted slack against a high-precision exponentiation oracle") {
  // gamma^100 by repeated squaring in long double.
  long double base = 0.95L;
  long double pow_acc = 1.0L;
  int e = 100;
  while (e > 0) {
    if (e & 1) pow_acc *= base;
    base *= base;
    e >>= 1;
  }
  const double gamma_pow = static_cast<double>(pow_acc);

  auto [eps, c] = slack_discounted(0.001, 0.95, 100);
  CHECK(eps == doctest::Approx(0.001 * (1.0 - gamma_pow * 0.05)).epsilon(1e-12));
  CHECK(eps > 0.000999);
  CHECK(eps < 0.001);
  CHECK(c == doctest::Approx((1.0 - 0.001 + eps) / 0.05).epsilon(1e-12));
}

TEST_CASE("discounted slack is strictly increasing in t_safe") {
  double prev = -1.0;
  for (std::int64_t t = 0; t <= 200; t += 10) {
    const double eps = slack_discounted(0.01, 0.95, t).epsilon;
    CHECK(eps > prev);
    prev = eps;
  }
}

TEST_CASE("slack functions reject out-of-range parameters") {
  CHECK_THROWS_AS(slack_episodic(0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(slack_episodic(1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(slack_episodic(0.5, -1), std::invalid_argument);
  CHECK_THROWS_AS(slack_discounted(0.5, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(slack_discounted(0.5, 0.9, -2), std::invalid_argument);
}

TEST_CASE("derived discounted thresholds always stay below the feasibility ceiling") {
  for (double delta : {0.001, 0.01, 0.2, 0.9}) {
    for (double gamma : {0.5, 0.9, 0.95, 0.99}) {
      for (std::int64_t t : {0, 10, 100, 1000}) {
        ConstraintSpec spec = ConstraintSpec::discounted(0, delta, gamma, t);
        CHECK(spec.epsilon >= 0.0);
        CHECK(spec.epsilon <= delta);
        CHECK(spec.threshold <= 1.0 / (1.0 - gamma));
        // The margin gamma^t (1-gamma) keeps epsilon strictly inside [0,
        // delta); assert strictness wherever doubles can represent it.
        const double margin = std::pow(gamma, static_cast<double>(t)) * (1.0 - gamma);
        if (margin > 1e-12) {
          CHECK(spec.epsilon < delta);
          CHECK(spec.threshold < 1.0 / (1.0 - gamma));
        }
      }
    }
  }
}

TEST_CASE("raw thresholds at or above 1/(1-gamma) are rejected") {
  CHECK_THROWS_AS(ConstraintSpec::raw(0, 10.0, TaskMode::Continuing, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(ConstraintSpec::raw(0, 10.5, TaskMode::Continuing, 0.9), std::invalid_argument);
  CHECK_NOTHROW(ConstraintSpec::raw(0, 9.99, TaskMode::Continuing, 0.9));
  CHECK_THROWS_AS(ConstraintSpec::raw(0, 1.5, TaskMode::Episodic), std::invalid_argument);
  CHECK_NOTHROW(ConstraintSpec::raw(0, 0.97, TaskMode::Episodic));
}

TEST_CASE("certain events certify zero residual risk") {
  std::vector<double> mu{0.5, 0.3, 0.2};
  std::vector<double> probs{1.0, 1.0, 1.0};
  auto delta = certify_joint_safety(mu, probs, 0.2, 2);
  REQUIRE(delta.has_value());
  CHECK(*delta == 0.0);
}

TEST_CASE("uniform weights reproduce the episodic certificate chain") {
  // mu_t = mu' = 1/(T+1) and average probability 1 - delta/(T+1) certify
  // exactly delta.
  const int big_t = 9;
  const double delta = 0.05;
  std::vector<double> mu(big_t + 1, 1.0 / (big_t + 1));
  std::vector<double> probs(big_t + 1, 1.0 - delta / (big_t + 1));
  auto cert = certify_joint_safety(mu, probs, 1.0 / (big_t + 1), big_t);
  REQUIRE(cert.has_value());
  CHECK(*cert == doctest::Approx(delta).epsilon(1e-10));
}

TEST_CASE("invalid weight structure yields no certificate") {
  std::vector<double> increasing{0.2, 0.3, 0.5};
  std::vector<double> probs{0.9, 0.9, 0.9};
  CHECK(!certify_joint_safety(increasing, probs, 0.1, 2).has_value());

  std::vector<double> mu{0.5, 0.3, 0.2};
  CHECK(!certify_joint_safety(mu, probs, 0.4, 2).has_value());  // mu' > mu_k
  CHECK(!certify_joint_safety({0.5, 0.0, 0.0}, probs, 0.1, 2).has_value());  // non-positive
}

TEST_CASE("malformed inputs are rejected outright") {
  std::vector<double> mu{0.5, 0.3};
  CHECK_THROWS_AS(certify_joint_safety(mu, {0.9}, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(certify_joint_safety(mu, {0.9, 1.2}, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(certify_joint_safety(mu, {0.9, 0.9}, 0.1, 5), std::invalid_argument);
}

TEST_CASE("certificate is never negative when probabilities are valid") {
  auto g = rng::make_engine(7, "cert");
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t t_len = 2 + static_cast<std::size_t>(rng::uniform01(g) * 5);
    std::vector<double> mu(t_len);
    double level = 1.0;
    for (auto& w : mu) {
      level *= 0.5 + 0.5 * rng::uniform01(g);
      w = level;
    }
    std::vector<double> probs(t_len);
    for (auto& p : probs) p = rng::uniform01(g);
    const std::size_t k = static_cast<std::size_t>(rng::uniform01(g) * t_len);
    auto cert = certify_joint_safety(mu, probs, mu[k], k);
    REQUIRE(cert.has_value());
    CHECK(*cert >= 0.0);
  }
}

TEST_CASE("multipliers reject negative components") {
  Eigen::VectorXd bad(2);
  bad << 0.5, -0.1;
  CHECK_THROWS_AS(Multipliers{bad}, std::invalid_argument);
  Eigen::VectorXd nan(1);
  nan << std::nan("");
  CHECK_THROWS_AS(Multipliers{nan}, std::invalid_argument);
  CHECK_NOTHROW(Multipliers::constant(3, 0.0));
  CHECK_THROWS_AS(Multipliers::constant(3, -1.0), std::invalid_argument);
}

TEST_CASE("per-step thresholds scale by 1-gamma only in continuing mode") {
  std::vector<ConstraintSpec> specs{ConstraintSpec::discounted(0, 0.01, 0.9, 50)};
  Eigen::VectorXd c = thresholds(specs);
  Eigen::VectorXd cs = per_step_thresholds(specs, TaskMode::Continuing, 0.9);
  CHECK(cs[0] == doctest::Approx(c[0] * 0.1).epsilon(1e-15));
  std::vector<ConstraintSpec> ep{ConstraintSpec::episodic(0, 0.01, 9)};
  CHECK(per_step_thresholds(ep, TaskMode::Episodic, 0.9)[0] == thresholds(ep)[0]);
}
