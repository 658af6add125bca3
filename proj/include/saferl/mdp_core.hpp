#pragma once

#include <concepts>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "saferl/rng.hpp"

namespace saferl {

// An environment exposes the state/action spaces implicitly through its
// State/Action types, plus the transition, reward, per-constraint safe-set
// membership and initial-state sampling. Safe-set predicates must be pure.
template <typename E>
concept Environment = requires(const E& env, const typename E::State& s,
                               const typename E::Action& a, std::mt19937_64& g) {
  typename E::State;
  typename E::Action;
  { env.step(s, a, g) } -> std::convertible_to<typename E::State>;
  { env.reward(s, a) } -> std::convertible_to<double>;
  { env.in_safe_set(s, std::size_t{0}) } -> std::convertible_to<bool>;
  { env.num_constraints() } -> std::convertible_to<std::size_t>;
  { env.sample_initial(g) } -> std::convertible_to<typename E::State>;
};

template <typename P, typename S, typename A>
concept PolicyFor = requires(const P& p, const S& s, std::mt19937_64& g) {
  { p.sample_action(s, g) } -> std::convertible_to<A>;
};

// A policy usable by the score-function gradient estimators: adds the
// gradient of the log density with respect to the parameters.
template <typename P, typename S, typename A>
concept DifferentiablePolicyFor =
    PolicyFor<P, S, A> && requires(const P& p, const S& s, const A& a) {
      typename P::Params;
      { p.score(s, a) } -> std::convertible_to<typename P::Params>;
    };

enum class HorizonKind { FixedHorizon, GeometricHorizon };

// One rollout of length horizon+1, indexed t = 0..horizon. All sequences
// share that length; indicators[t*m + i] caches the safe-set membership of
// states[t] for constraint i.
template <typename S, typename A>
struct Trajectory {
  std::vector<S> states;
  std::vector<A> actions;
  std::vector<double> rewards;
  std::vector<std::uint8_t> indicators;  // row-major (horizon+1) x m
  std::size_t m = 0;
  HorizonKind kind = HorizonKind::FixedHorizon;

  std::size_t horizon() const { return states.size() - 1; }
  std::size_t length() const { return states.size(); }
  bool indicator(std::size_t t, std::size_t i) const { return indicators[t * m + i] != 0; }

  double total_reward() const {
    double s = 0.0;
    for (double r : rewards) s += r;
    return s;
  }
};

// Draws T with P(T = t) = (1-gamma) * gamma^t, so P(T >= t) = gamma^t. The
// plain sum of a bounded per-step quantity over t = 0..T is then an unbiased
// estimate of its gamma-discounted series.
inline std::int64_t sample_geometric_horizon(double gamma, std::mt19937_64& g) {
  if (!(gamma > 0.0) || !(gamma < 1.0))
    throw std::invalid_argument("sample_geometric_horizon: gamma must lie in (0,1)");
  const double u = rng::uniform01_open_low(g);  // T >= t  <=>  u <= gamma^t
  return static_cast<std::int64_t>(std::floor(std::log(u) / std::log(gamma)));
}

// Geometric horizon sampler with a hard cap on pathological draws. The cap
// introduces a bias of order gamma^cap; truncation events are counted so
// callers can report them.
class HorizonSampler {
 public:
  HorizonSampler(double gamma, std::int64_t cap = -1) : gamma_(gamma), cap_(cap) {
    if (!(gamma > 0.0) || !(gamma < 1.0))
      throw std::invalid_argument("HorizonSampler: gamma must lie in (0,1)");
    if (cap_ < 0) cap_ = default_cap(gamma);
  }

  static std::int64_t default_cap(double gamma) {
    return static_cast<std::int64_t>(std::ceil(10.0 * gamma / (1.0 - gamma)));
  }

  std::int64_t sample(std::mt19937_64& g) {
    std::int64_t t = sample_geometric_horizon(gamma_, g);
    if (t > cap_) {
      ++truncations_;
      t = cap_;
    }
    return t;
  }

  std::int64_t cap() const { return cap_; }
  std::uint64_t truncations() const { return truncations_; }

 private:
  double gamma_;
  std::int64_t cap_;
  std::uint64_t truncations_ = 0;
};

// Independent engines for the independent sources of randomness inside one
// rollout, each derived as a named sub-stream of the master seed.
struct RolloutStreams {
  std::mt19937_64 init;
  std::mt19937_64 action;
  std::mt19937_64 transition;

  static RolloutStreams make(std::uint64_t seed, std::uint64_t iteration, std::uint64_t index = 0) {
    return RolloutStreams{rng::make_engine(seed, "init", iteration, index),
                          rng::make_engine(seed, "action", iteration, index),
                          rng::make_engine(seed, "transition", iteration, index)};
  }
};

template <Environment E, typename P>
  requires PolicyFor<P, typename E::State, typename E::Action>
Trajectory<typename E::State, typename E::Action> rollout(
    const E& env, const P& policy, std::size_t horizon, RolloutStreams& streams,
    HorizonKind kind = HorizonKind::FixedHorizon) {
  using S = typename E::State;
  using A = typename E::Action;

  Trajectory<S, A> traj;
  const std::size_t m = env.num_constraints();
  traj.m = m;
  traj.kind = kind;
  traj.states.reserve(horizon + 1);
  traj.actions.reserve(horizon + 1);
  traj.rewards.reserve(horizon + 1);
  traj.indicators.reserve((horizon + 1) * m);

  S state = env.sample_initial(streams.init);
  for (std::size_t t = 0; t <= horizon; ++t) {
    A action = policy.sample_action(state, streams.action);
    traj.states.push_back(state);
    traj.actions.push_back(action);
    traj.rewards.push_back(env.reward(state, action));
    for (std::size_t i = 0; i < m; ++i)
      traj.indicators.push_back(env.in_safe_set(state, i) ? 1 : 0);
    if (t < horizon) state = env.step(state, action, streams.transition);
  }
  return traj;
}

}  // namespace saferl
