#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "saferl/mdp_core.hpp"
#include "support/test_support.hpp"

using namespace saferl;

namespace {

// Deterministic environment whose step returns the state unchanged.
struct IdentityEnv {
  using State = Eigen::Vector2d;
  using Action = Eigen::Vector2d;

  State step(const State& s, const Action&, std::mt19937_64&) const { return s; }
  double reward(const State& s, const Action&) const { return -s.squaredNorm(); }
  bool in_safe_set(const State& s, std::size_t) const { return s.norm() < 100.0; }
  std::size_t num_constraints() const { return 1; }
  State sample_initial(std::mt19937_64&) const { return State(1.0, 2.0); }
};

struct ZeroPolicy {
  using Params = Eigen::Vector2d;
  Eigen::Vector2d sample_action(const Eigen::Vector2d&, std::mt19937_64&) const {
    return Eigen::Vector2d::Zero();
  }
};

// Two-state Markov chain driven entirely by the transition stream.
struct ChainEnv {
  using State = std::size_t;
  using Action = std::size_t;
  Eigen::Matrix2d p;  // p(s, s') row-stochastic

  State step(State s, Action, std::mt19937_64& g) const {
    return rng::uniform01(g) < p(static_cast<Eigen::Index>(s), 0) ? 0 : 1;
  }
  double reward(State s, Action) const { return s == 0 ? 1.0 : 0.0; }
  bool in_safe_set(State s, std::size_t) const { return s == 0; }
  std::size_t num_constraints() const { return 1; }
  State sample_initial(std::mt19937_64&) const { return 0; }
};

struct NullPolicy {
  using Params = Eigen::VectorXd;
  std::size_t sample_action(std::size_t, std::mt19937_64&) const { return 0; }
};

}  // namespace

TEST_CASE("geometric horizon rejects gamma outside (0,1)") {
  auto g = rng::make_engine(1, "t");
  CHECK_THROWS_AS(sample_geometric_horizon(0.0, g), std::invalid_argument);
  CHECK_THROWS_AS(sample_geometric_horizon(1.0, g), std::invalid_argument);
  CHECK_THROWS_AS(sample_geometric_horizon(-0.5, g), std::invalid_argument);
}

TEST_CASE("geometric horizon degenerates to zero as gamma -> 0") {
  auto g = rng::make_engine(7, "degenerate");
  int zeros = 0;
  for (int i = 0; i < 10000; ++i)
    if (sample_geometric_horizon(1e-12, g) == 0) ++zeros;
  CHECK(zeros == 10000);
}

TEST_CASE("geometric horizon mean matches gamma/(1-gamma) at gamma=0.95") {
  const double gamma = 0.95;
  const int n = 1'000'000;
  auto g = rng::make_engine(1234, "geo-mean");
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(sample_geometric_horizon(gamma, g));
    sum += t;
    sq += t * t;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sq - n * mean * mean) / (n - 1));
  const double se = sd / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(mean - gamma / (1.0 - gamma)) < 3.0 * se);
}

TEST_CASE("geometric horizon tail at gamma=0.5: P(T >= 3) near 0.125") {
  const int n = 1'000'000;
  auto g = rng::make_engine(99, "geo-tail");
  int hits = 0;
  for (int i = 0; i < n; ++i)
    if (sample_geometric_horizon(0.5, g) >= 3) ++hits;
  const double p_hat = static_cast<double>(hits) / n;
  const double se = std::sqrt(0.125 * 0.875 / n);
  CHECK(std::abs(p_hat - 0.125) < 3.0 * se);
}

TEST_CASE("geometric survival function matches gamma^t across a gamma grid") {
  const int n = 200'000;
  for (double gamma : {0.1, 0.5, 0.9, 0.95, 0.99}) {
    std::vector<int> tail_counts(21, 0);
    auto g = rng::make_engine(4321, "geo-grid", static_cast<std::uint64_t>(gamma * 1000));
    for (int i = 0; i < n; ++i) {
      const std::int64_t t = sample_geometric_horizon(gamma, g);
      for (int k = 0; k <= 20; ++k)
        if (t >= k) ++tail_counts[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k <= 20; ++k) {
      const double expect = std::pow(gamma, k);
      const double p_hat = static_cast<double>(tail_counts[static_cast<std::size_t>(k)]) / n;
      const double se = std::sqrt(std::max(expect * (1.0 - expect), 1e-12) / n);
      CHECK(std::abs(p_hat - expect) < 4.0 * se + 1e-9);
    }
  }
}

TEST_CASE("horizon sampler caps pathological draws and counts truncations") {
  HorizonSampler sampler(0.99, 5);
  auto g = rng::make_engine(5, "cap");
  for (int i = 0; i < 1000; ++i) CHECK(sampler.sample(g) <= 5);
  CHECK(sampler.truncations() > 0);
  CHECK(HorizonSampler::default_cap(0.95) == 190);
}

TEST_CASE("rollout with horizon 0 yields exactly one tuple") {
  IdentityEnv env;
  ZeroPolicy policy;
  RolloutStreams streams = RolloutStreams::make(1, 0);
  auto traj = rollout(env, policy, 0, streams);
  CHECK(traj.length() == 1);
  CHECK(traj.states.size() == 1);
  CHECK(traj.actions.size() == 1);
  CHECK(traj.rewards.size() == 1);
  CHECK(traj.indicators.size() == 1);
  CHECK(traj.horizon() == 0);
}

TEST_CASE("identity dynamics with a mean-only policy pin the state") {
  IdentityEnv env;
  ZeroPolicy policy;
  RolloutStreams streams = RolloutStreams::make(3, 0);
  auto traj = rollout(env, policy, 25, streams);
  for (const auto& s : traj.states) CHECK((s - Eigen::Vector2d(1.0, 2.0)).norm() == 0.0);
}

TEST_CASE("rollout is bit-identical under a repeated seed") {
  ChainEnv env;
  env.p << 0.7, 0.3, 0.4, 0.6;
  NullPolicy policy;
  RolloutStreams a = RolloutStreams::make(42, 7);
  RolloutStreams b = RolloutStreams::make(42, 7);
  auto t1 = rollout(env, policy, 50, a);
  auto t2 = rollout(env, policy, 50, b);
  CHECK(t1.states == t2.states);
  CHECK(t1.rewards == t2.rewards);
  CHECK(t1.indicators == t2.indicators);
}

TEST_CASE("trajectory indicators equal the predicate re-evaluated on stored states") {
  ChainEnv env;
  env.p << 0.5, 0.5, 0.2, 0.8;
  NullPolicy policy;
  for (std::uint64_t k = 0; k < 20; ++k) {
    RolloutStreams streams = RolloutStreams::make(777, k);
    auto traj = rollout(env, policy, 30, streams);
    for (std::size_t t = 0; t < traj.length(); ++t)
      CHECK(traj.indicator(t, 0) == env.in_safe_set(traj.states[t], 0));
  }
}

TEST_CASE("chain rollouts reproduce exact Markov marginals") {
  ChainEnv env;
  env.p << 0.7, 0.3, 0.4, 0.6;
  NullPolicy policy;

  const int horizon = 6;
  const int n = 100'000;
  std::vector<int> in_state0(horizon + 1, 0);
  for (int j = 0; j < n; ++j) {
    RolloutStreams streams = RolloutStreams::make(2718, static_cast<std::uint64_t>(j));
    auto traj = rollout(env, policy, horizon, streams);
    for (int t = 0; t <= horizon; ++t)
      if (traj.states[static_cast<std::size_t>(t)] == 0) ++in_state0[static_cast<std::size_t>(t)];
  }

  // Exact marginals by matrix powers.
  Eigen::RowVector2d marginal(1.0, 0.0);
  for (int t = 0; t <= horizon; ++t) {
    const double expect = marginal[0];
    const double p_hat = static_cast<double>(in_state0[static_cast<std::size_t>(t)]) / n;
    const double se = std::sqrt(std::max(expect * (1.0 - expect), 1e-12) / n);
    CHECK(std::abs(p_hat - expect) < 3.0 * se + 1e-12);
    marginal = marginal * env.p;
  }
}
