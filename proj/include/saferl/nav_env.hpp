#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "saferl/rng.hpp"

namespace saferl::nav {

struct Circle {
  Eigen::Vector2d center;
  double radius = 0.0;
};

struct Rect {
  Eigen::Vector2d min;
  Eigen::Vector2d max;
};

using Shape = std::variant<Circle, Rect>;

// Obstacle boundaries count as unsafe (closed obstacles), so the safe set is
// the open complement.
bool in_safe_set(const Eigen::Vector2d& state, const Shape& obstacle);

struct Obstacle {
  std::string label;
  Shape shape;
  // Constraint parameters; exactly one of (delta, t_safe) or raw_threshold
  // is used, recorded by the run manifest.
  double delta = 0.001;
  std::int64_t t_safe = 100;
  std::optional<double> raw_threshold;
};

struct FixedStart {
  Eigen::Vector2d point;
};
struct MixtureStart {
  std::vector<Eigen::Vector2d> points;  // uniform over the listed points
};
struct UniformSafeStart {};

using StartDistribution = std::variant<UniformSafeStart, FixedStart, MixtureStart>;

struct NavScenario {
  std::string name;
  std::string note;
  Eigen::Vector2d domain_min{0.0, 0.0};
  Eigen::Vector2d domain_max{10.0, 10.0};
  Eigen::Vector2d goal{8.5, 1.5};
  std::vector<Obstacle> obstacles;
  StartDistribution initial_distribution = UniformSafeStart{};
  StartDistribution eval_starts = MixtureStart{
      {Eigen::Vector2d(1.0, 9.0), Eigen::Vector2d(8.0, 9.5), Eigen::Vector2d(0.5, 2.5),
       Eigen::Vector2d(5.0, 6.0)}};

  void validate() const;  // throws std::invalid_argument with a field path
};

// Default five-obstacle scenario. The obstacle coordinates are this
// project's own defaults.
NavScenario default_scenario();

Eigen::Vector2d clamp_to_box(const Eigen::Vector2d& p, const Eigen::Vector2d& lo,
                             const Eigen::Vector2d& hi);

// Position-controlled point agent: s' = clamp(s + a, domain), reward
// -||s - goal||^2, one safety constraint per obstacle. Collisions only flip
// indicators; episodes never terminate on contact.
class NavEnv {
 public:
  using State = Eigen::Vector2d;
  using Action = Eigen::Vector2d;

  explicit NavEnv(NavScenario scenario);

  const NavScenario& scenario() const { return scenario_; }

  State step(const State& s, const Action& a, std::mt19937_64&) const {
    return clamp_to_box(s + a, scenario_.domain_min, scenario_.domain_max);
  }
  double reward(const State& s, const Action&) const {
    return -(s - scenario_.goal).squaredNorm();
  }
  bool in_safe_set(const State& s, std::size_t i) const {
    return nav::in_safe_set(s, scenario_.obstacles[i].shape);
  }
  std::size_t num_constraints() const { return scenario_.obstacles.size(); }
  State sample_initial(std::mt19937_64& g) const { return sample_start(initial_, g); }

  State sample_start(const StartDistribution& dist, std::mt19937_64& g) const;

  // Same environment with a different start distribution (used for
  // figure-style evaluation rollouts).
  NavEnv with_starts(const StartDistribution& dist) const;

 private:
  NavScenario scenario_;
  StartDistribution initial_;
};

}  // namespace saferl::nav
