#include "saferl/nav_env.hpp"

#include <cmath>
#include <stdexcept>

namespace saferl::nav {

bool in_safe_set(const Eigen::Vector2d& state, const Shape& obstacle) {
  if (const Circle* c = std::get_if<Circle>(&obstacle))
    return (state - c->center).squaredNorm() > c->radius * c->radius;
  const Rect& r = std::get<Rect>(obstacle);
  const bool inside = state.x() >= r.min.x() && state.x() <= r.max.x() &&
                      state.y() >= r.min.y() && state.y() <= r.max.y();
  return !inside;
}

Eigen::Vector2d clamp_to_box(const Eigen::Vector2d& p, const Eigen::Vector2d& lo,
                             const Eigen::Vector2d& hi) {
  return p.cwiseMax(lo).cwiseMin(hi);
}

namespace {

bool shape_intersects_box(const Shape& shape, const Eigen::Vector2d& lo,
                          const Eigen::Vector2d& hi) {
  if (const Circle* c = std::get_if<Circle>(&shape)) {
    const Eigen::Vector2d nearest = clamp_to_box(c->center, lo, hi);
    return (nearest - c->center).squaredNorm() <= c->radius * c->radius;
  }
  const Rect& r = std::get<Rect>(shape);
  return r.min.x() <= hi.x() && r.max.x() >= lo.x() && r.min.y() <= hi.y() && r.max.y() >= lo.y();
}

bool point_in_box(const Eigen::Vector2d& p, const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) {
  return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
}

void check_start_support(const NavScenario& scenario, const StartDistribution& dist,
                         const std::string& field) {
  auto check_point = [&](const Eigen::Vector2d& p, const std::string& where) {
    if (!point_in_box(p, scenario.domain_min, scenario.domain_max))
      throw std::invalid_argument(where + ": start point outside the domain");
    for (std::size_t i = 0; i < scenario.obstacles.size(); ++i)
      if (!in_safe_set(p, scenario.obstacles[i].shape))
        throw std::invalid_argument(where + ": start point lies inside obstacle '" +
                                    scenario.obstacles[i].label + "'");
  };
  if (const FixedStart* f = std::get_if<FixedStart>(&dist)) check_point(f->point, field);
  if (const MixtureStart* m = std::get_if<MixtureStart>(&dist)) {
    if (m->points.empty()) throw std::invalid_argument(field + ": empty start mixture");
    for (std::size_t j = 0; j < m->points.size(); ++j)
      check_point(m->points[j], field + "[" + std::to_string(j) + "]");
  }
}

}  // namespace

void NavScenario::validate() const {
  if (!(domain_max.x() > domain_min.x()) || !(domain_max.y() > domain_min.y()))
    throw std::invalid_argument("domain: max must exceed min in both coordinates");
  if (!point_in_box(goal, domain_min, domain_max))
    throw std::invalid_argument("goal: must lie inside the domain");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const std::string where = "obstacles[" + std::to_string(i) + "]";
    const Obstacle& o = obstacles[i];
    if (o.label.empty()) throw std::invalid_argument(where + ".label: must be non-empty");
    if (const Circle* c = std::get_if<Circle>(&o.shape)) {
      if (!(c->radius > 0.0)) throw std::invalid_argument(where + ".radius: must be > 0");
    } else {
      const Rect& r = std::get<Rect>(o.shape);
      if (!(r.max.x() > r.min.x()) || !(r.max.y() > r.min.y()))
        throw std::invalid_argument(where + ": rectangle max must exceed min");
    }
    if (!shape_intersects_box(o.shape, domain_min, domain_max))
      throw std::invalid_argument(where + ": obstacle does not intersect the domain");
    if (!o.raw_threshold) {
      if (!(o.delta > 0.0) || !(o.delta < 1.0))
        throw std::invalid_argument(where + ".delta: must lie in (0,1)");
      if (o.t_safe < 0) throw std::invalid_argument(where + ".t_safe: must be >= 0");
    }
  }
  check_start_support(*this, initial_distribution, "initial_distribution");
  check_start_support(*this, eval_starts, "eval_starts");
}

NavScenario default_scenario() {
  NavScenario s;
  s.name = "nav_default";
  s.note =
      "Obstacle coordinates are this toolkit's own defaults; they were chosen for coverage of "
      "the map, not taken from any external source.";
  s.obstacles = {
      {"red", Circle{{5.0, 5.0}, 0.8}, 0.001, 100, std::nullopt},
      {"green", Rect{{6.3, 2.4}, {7.6, 4.2}}, 0.001, 100, std::nullopt},
      {"orange", Circle{{2.5, 6.0}, 0.7}, 0.001, 100, std::nullopt},
      {"cyan", Rect{{1.5, 1.0}, {3.0, 2.2}}, 0.001, 100, std::nullopt},
      {"blue", Circle{{8.0, 7.5}, 0.9}, 0.001, 100, std::nullopt},
  };
  s.validate();
  return s;
}

NavEnv::NavEnv(NavScenario scenario)
    : scenario_(std::move(scenario)), initial_(scenario_.initial_distribution) {
  scenario_.validate();
}

NavEnv::State NavEnv::sample_start(const StartDistribution& dist, std::mt19937_64& g) const {
  if (const FixedStart* f = std::get_if<FixedStart>(&dist)) return f->point;
  if (const MixtureStart* m = std::get_if<MixtureStart>(&dist)) {
    const std::size_t j =
        std::min(m->points.size() - 1,
                 static_cast<std::size_t>(rng::uniform01(g) * static_cast<double>(m->points.size())));
    return m->points[j];
  }
  // Uniform over the safe region by rejection; obstacles cover a small
  // fraction of the domain, so this terminates quickly.
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Eigen::Vector2d p(rng::uniform(g, scenario_.domain_min.x(), scenario_.domain_max.x()),
                      rng::uniform(g, scenario_.domain_min.y(), scenario_.domain_max.y()));
    bool safe = true;
    for (std::size_t i = 0; i < scenario_.obstacles.size() && safe; ++i)
      safe = nav::in_safe_set(p, scenario_.obstacles[i].shape);
    if (safe) return p;
  }
  throw std::runtime_error("sample_start: safe region appears to have negligible area");
}

NavEnv NavEnv::with_starts(const StartDistribution& dist) const {
  NavEnv out = *this;
  out.initial_ = dist;
  return out;
}

}  // namespace saferl::nav
