#include "saferl/formats.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

namespace saferl::io {

using nlohmann::json;

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

[[noreturn]] void fail(const std::string& where, const std::string& message) {
  throw std::runtime_error(where + ": " + message);
}

// Unknown keys are configuration errors, not warnings: a typoed step size
// must not silently fall back to a default.
void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& required, const std::set<std::string>& optional) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : obj.items())
    if (!required.contains(key) && !optional.contains(key))
      fail(where + "/" + key, "unknown key");
  for (const auto& key : required)
    if (!obj.contains(key)) fail(where + "/" + key, "missing required key");
}

double get_number(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.at(key).is_number()) fail(where + "/" + key, "expected a number");
  return obj.at(key).get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.at(key).is_number_integer()) fail(where + "/" + key, "expected an integer");
  return obj.at(key).get<std::int64_t>();
}

Eigen::Vector2d get_point(const json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number())
    fail(where, "expected a two-element numeric array");
  return {value[0].get<double>(), value[1].get<double>()};
}

void check_version(const json& obj, const std::string& where, int expected) {
  if (!obj.contains("format_version")) fail(where, "missing format_version");
  if (!obj.at("format_version").is_number_integer() ||
      obj.at("format_version").get<int>() != expected)
    throw VersionMismatch(where + ": format_version " + obj.at("format_version").dump() +
                          " is not supported (expected " + std::to_string(expected) + ")");
}

json point_to_json(const Eigen::Vector2d& p) { return json::array({p.x(), p.y()}); }

nav::StartDistribution parse_start(const json& obj, const std::string& where) {
  require_keys(obj, where, {"type"}, {"point", "points"});
  const std::string type = obj.at("type").get<std::string>();
  if (type == "uniform_safe") return nav::UniformSafeStart{};
  if (type == "fixed") {
    if (!obj.contains("point")) fail(where, "fixed start requires 'point'");
    return nav::FixedStart{get_point(obj.at("point"), where + "/point")};
  }
  if (type == "mixture") {
    if (!obj.contains("points")) fail(where, "mixture start requires 'points'");
    nav::MixtureStart mix;
    const json& pts = obj.at("points");
    if (!pts.is_array() || pts.empty()) fail(where + "/points", "expected a non-empty array");
    for (std::size_t j = 0; j < pts.size(); ++j)
      mix.points.push_back(get_point(pts[j], where + "/points/" + std::to_string(j)));
    return mix;
  }
  fail(where + "/type", "unknown start distribution '" + type + "'");
}

json start_to_json(const nav::StartDistribution& dist) {
  json out;
  if (std::holds_alternative<nav::UniformSafeStart>(dist)) {
    out["type"] = "uniform_safe";
  } else if (const nav::FixedStart* f = std::get_if<nav::FixedStart>(&dist)) {
    out["type"] = "fixed";
    out["point"] = point_to_json(f->point);
  } else {
    const nav::MixtureStart& m = std::get<nav::MixtureStart>(dist);
    out["type"] = "mixture";
    out["points"] = json::array();
    for (const auto& p : m.points) out["points"].push_back(point_to_json(p));
  }
  return out;
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::StochasticPrimalDual: return "stochastic-primal-dual";
    case Algorithm::DualDescent: return "dual-descent";
    case Algorithm::FixedWeight: return "fixed-weight";
  }
  throw std::logic_error("unreachable");
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "stochastic-primal-dual") return Algorithm::StochasticPrimalDual;
  if (s == "dual-descent") return Algorithm::DualDescent;
  if (s == "fixed-weight") return Algorithm::FixedWeight;
  throw std::runtime_error("unknown algorithm '" + s + "'");
}

nav::NavScenario load_scenario(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  const std::string where = path.string();
  check_version(doc, where, kScenarioFormatVersion);
  require_keys(doc, where, {"format_version", "domain", "goal", "obstacles"},
               {"name", "note", "initial_distribution", "eval_starts"});

  nav::NavScenario scenario;
  if (doc.contains("name")) scenario.name = doc.at("name").get<std::string>();
  if (doc.contains("note")) scenario.note = doc.at("note").get<std::string>();

  const json& domain = doc.at("domain");
  require_keys(domain, where + "/domain", {"min", "max"}, {});
  scenario.domain_min = get_point(domain.at("min"), where + "/domain/min");
  scenario.domain_max = get_point(domain.at("max"), where + "/domain/max");
  scenario.goal = get_point(doc.at("goal"), where + "/goal");

  const json& obstacles = doc.at("obstacles");
  if (!obstacles.is_array()) fail(where + "/obstacles", "expected an array");
  scenario.obstacles.clear();
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const std::string owhere = where + "/obstacles/" + std::to_string(i);
    const json& o = obstacles[i];
    require_keys(o, owhere, {"label", "shape"}, {"constraint"});
    nav::Obstacle obstacle;
    obstacle.label = o.at("label").get<std::string>();

    const json& shape = o.at("shape");
    require_keys(shape, owhere + "/shape", {"type"}, {"center", "radius", "min", "max"});
    const std::string type = shape.at("type").get<std::string>();
    if (type == "circle") {
      if (!shape.contains("center") || !shape.contains("radius"))
        fail(owhere + "/shape", "circle requires 'center' and 'radius'");
      obstacle.shape = nav::Circle{get_point(shape.at("center"), owhere + "/shape/center"),
                                   get_number(shape, owhere + "/shape", "radius")};
    } else if (type == "rect") {
      if (!shape.contains("min") || !shape.contains("max"))
        fail(owhere + "/shape", "rect requires 'min' and 'max'");
      obstacle.shape = nav::Rect{get_point(shape.at("min"), owhere + "/shape/min"),
                                 get_point(shape.at("max"), owhere + "/shape/max")};
    } else {
      fail(owhere + "/shape/type", "unknown shape '" + type + "'");
    }

    if (o.contains("constraint")) {
      const json& c = o.at("constraint");
      require_keys(c, owhere + "/constraint", {}, {"delta", "t_safe", "c"});
      if (c.contains("c")) {
        if (c.contains("delta") || c.contains("t_safe"))
          fail(owhere + "/constraint", "give either a raw threshold 'c' or (delta, t_safe)");
        obstacle.raw_threshold = get_number(c, owhere + "/constraint", "c");
      } else {
        if (c.contains("delta")) obstacle.delta = get_number(c, owhere + "/constraint", "delta");
        if (c.contains("t_safe"))
          obstacle.t_safe = get_integer(c, owhere + "/constraint", "t_safe");
      }
    }
    scenario.obstacles.push_back(std::move(obstacle));
  }

  if (doc.contains("initial_distribution"))
    scenario.initial_distribution =
        parse_start(doc.at("initial_distribution"), where + "/initial_distribution");
  if (doc.contains("eval_starts"))
    scenario.eval_starts = parse_start(doc.at("eval_starts"), where + "/eval_starts");

  try {
    scenario.validate();
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return scenario;
}

void save_scenario(const nav::NavScenario& scenario, const std::filesystem::path& path) {
  json doc;
  doc["format_version"] = kScenarioFormatVersion;
  if (!scenario.name.empty()) doc["name"] = scenario.name;
  if (!scenario.note.empty()) doc["note"] = scenario.note;
  doc["domain"] = {{"min", point_to_json(scenario.domain_min)},
                   {"max", point_to_json(scenario.domain_max)}};
  doc["goal"] = point_to_json(scenario.goal);
  doc["obstacles"] = json::array();
  for (const auto& o : scenario.obstacles) {
    json jo;
    jo["label"] = o.label;
    if (const nav::Circle* c = std::get_if<nav::Circle>(&o.shape))
      jo["shape"] = {{"type", "circle"}, {"center", point_to_json(c->center)}, {"radius", c->radius}};
    else {
      const nav::Rect& r = std::get<nav::Rect>(o.shape);
      jo["shape"] = {{"type", "rect"}, {"min", point_to_json(r.min)}, {"max", point_to_json(r.max)}};
    }
    if (o.raw_threshold)
      jo["constraint"] = {{"c", *o.raw_threshold}};
    else
      jo["constraint"] = {{"delta", o.delta}, {"t_safe", o.t_safe}};
    doc["obstacles"].push_back(std::move(jo));
  }
  doc["initial_distribution"] = start_to_json(scenario.initial_distribution);
  doc["eval_starts"] = start_to_json(scenario.eval_starts);
  write_json_file(doc, path);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  const std::string where = path.string();
  check_version(doc, where, kConfigFormatVersion);
  require_keys(doc, where, {"format_version", "training"},
               {"scenario", "policy", "evaluation", "algorithm", "fixed_lambda"});

  RunConfig config;
  if (doc.contains("scenario")) {
    config.scenario_path = doc.at("scenario").get<std::string>();
    std::filesystem::path sp(config.scenario_path);
    if (sp.is_relative()) sp = path.parent_path() / sp;
    config.scenario = load_scenario(sp);
  } else {
    config.scenario = nav::default_scenario();
  }

  const json& tr = doc.at("training");
  require_keys(tr, where + "/training", {"iterations", "seed"},
               {"mode", "gamma", "episode_horizon", "eta_theta", "eta_lambda", "batch_size",
                "estimator_variant", "inner_iterations", "horizon_cap", "baseline", "step_decay"});
  TrainConfig& t = config.training;
  t.iterations = get_integer(tr, where + "/training", "iterations");
  t.seed = static_cast<std::uint64_t>(get_integer(tr, where + "/training", "seed"));
  if (tr.contains("mode")) {
    const std::string mode = tr.at("mode").get<std::string>();
    if (mode == "episodic")
      t.mode = TaskMode::Episodic;
    else if (mode == "continuing")
      t.mode = TaskMode::Continuing;
    else
      fail(where + "/training/mode", "expected 'episodic' or 'continuing'");
  }
  if (tr.contains("gamma")) t.gamma = get_number(tr, where + "/training", "gamma");
  if (tr.contains("episode_horizon"))
    t.episodic_horizon = get_integer(tr, where + "/training", "episode_horizon");
  if (tr.contains("eta_theta")) t.eta_theta = get_number(tr, where + "/training", "eta_theta");
  if (tr.contains("eta_lambda")) t.eta_lambda = get_number(tr, where + "/training", "eta_lambda");
  if (tr.contains("batch_size")) t.batch_size = get_integer(tr, where + "/training", "batch_size");
  if (tr.contains("inner_iterations"))
    t.inner_iterations = get_integer(tr, where + "/training", "inner_iterations");
  if (tr.contains("horizon_cap")) t.horizon_cap = get_integer(tr, where + "/training", "horizon_cap");
  if (tr.contains("baseline")) t.baseline = get_number(tr, where + "/training", "baseline");
  if (tr.contains("step_decay")) t.step_decay = tr.at("step_decay").get<bool>();
  if (tr.contains("estimator_variant")) {
    const std::string v = tr.at("estimator_variant").get<std::string>();
    if (v == "paper")
      t.variant = GradientVariant::Paper;
    else if (v == "full-reinforce")
      t.variant = GradientVariant::FullReinforce;
    else
      fail(where + "/training/estimator_variant", "expected 'paper' or 'full-reinforce'");
  }

  if (doc.contains("policy")) {
    const json& p = doc.at("policy");
    require_keys(p, where + "/policy", {}, {"spacing", "sigma", "covariance", "feature_cutoff"});
    if (p.contains("spacing")) config.policy.spacing = get_number(p, where + "/policy", "spacing");
    if (p.contains("sigma")) config.policy.sigma = get_number(p, where + "/policy", "sigma");
    if (p.contains("covariance")) {
      const json& cov = p.at("covariance");
      if (!cov.is_array() || cov.empty()) fail(where + "/policy/covariance", "expected an array");
      config.policy.covariance_diag.resize(static_cast<Eigen::Index>(cov.size()));
      for (std::size_t j = 0; j < cov.size(); ++j) {
        if (!cov[j].is_number()) fail(where + "/policy/covariance", "expected numbers");
        config.policy.covariance_diag[static_cast<Eigen::Index>(j)] = cov[j].get<double>();
      }
    }
    if (p.contains("feature_cutoff"))
      config.policy.feature_cutoff = get_number(p, where + "/policy", "feature_cutoff");
  }

  if (doc.contains("evaluation")) {
    const json& e = doc.at("evaluation");
    require_keys(e, where + "/evaluation", {}, {"cadence", "rollouts", "horizon", "starts"});
    if (e.contains("cadence")) t.eval_cadence = get_integer(e, where + "/evaluation", "cadence");
    if (e.contains("rollouts")) t.eval_rollouts = get_integer(e, where + "/evaluation", "rollouts");
    if (e.contains("horizon")) t.eval_horizon = get_integer(e, where + "/evaluation", "horizon");
    if (e.contains("starts")) {
      const std::string s = e.at("starts").get<std::string>();
      if (s != "paper4" && s != "training")
        fail(where + "/evaluation/starts", "expected 'paper4' or 'training'");
      config.eval_start_mode = s;
    }
  }

  if (doc.contains("algorithm"))
    config.algorithm = algorithm_from_string(doc.at("algorithm").get<std::string>());
  if (doc.contains("fixed_lambda"))
    t.fixed_lambda = get_number(doc, where, "fixed_lambda");
  if (config.algorithm == Algorithm::FixedWeight && !t.fixed_lambda)
    fail(where, "fixed-weight algorithm requires 'fixed_lambda'");
  if (config.algorithm != Algorithm::FixedWeight && t.fixed_lambda)
    fail(where, "'fixed_lambda' is only valid with the fixed-weight algorithm");
  return config;
}

TabularCmdp load_cmdp(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  const std::string where = path.string();
  check_version(doc, where, kCmdpFormatVersion);
  require_keys(doc, where,
               {"format_version", "n_states", "n_actions", "gamma", "transitions", "rewards",
                "indicators", "initial", "thresholds"},
               {"name", "note"});

  TabularCmdp mdp;
  mdp.n_states = static_cast<std::size_t>(get_integer(doc, where, "n_states"));
  mdp.n_actions = static_cast<std::size_t>(get_integer(doc, where, "n_actions"));
  mdp.gamma = get_number(doc, where, "gamma");

  const json& tr = doc.at("transitions");
  if (!tr.is_array() || tr.size() != mdp.n_actions)
    fail(where + "/transitions", "expected one matrix per action");
  mdp.transitions.resize(mdp.n_actions);
  for (std::size_t a = 0; a < mdp.n_actions; ++a) {
    const json& mat = tr[a];
    if (!mat.is_array() || mat.size() != mdp.n_states)
      fail(where + "/transitions/" + std::to_string(a), "expected n_states rows");
    mdp.transitions[a].resize(static_cast<Eigen::Index>(mdp.n_states),
                              static_cast<Eigen::Index>(mdp.n_states));
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      const json& row = mat[s];
      if (!row.is_array() || row.size() != mdp.n_states)
        fail(where + "/transitions/" + std::to_string(a) + "/" + std::to_string(s),
             "expected n_states entries");
      for (std::size_t t = 0; t < mdp.n_states; ++t)
        mdp.transitions[a](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) =
            row[t].get<double>();
    }
  }

  auto load_matrix = [&](const char* key, Eigen::MatrixXd& out, std::size_t cols) {
    const json& m = doc.at(key);
    if (!m.is_array() || m.size() != mdp.n_states)
      fail(where + "/" + key, "expected n_states rows");
    out.resize(static_cast<Eigen::Index>(mdp.n_states), static_cast<Eigen::Index>(cols));
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      const json& row = m[s];
      if (!row.is_array() || row.size() != cols)
        fail(where + "/" + key + "/" + std::to_string(s), "row length mismatch");
      for (std::size_t j = 0; j < cols; ++j)
        out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = row[j].get<double>();
    }
  };
  load_matrix("rewards", mdp.rewards, mdp.n_actions);
  const std::size_t m_count = doc.at("indicators").empty() ? 0 : doc.at("indicators")[0].size();
  load_matrix("indicators", mdp.indicators, m_count);

  const json& init = doc.at("initial");
  if (!init.is_array() || init.size() != mdp.n_states)
    fail(where + "/initial", "expected n_states entries");
  mdp.initial.resize(static_cast<Eigen::Index>(mdp.n_states));
  for (std::size_t s = 0; s < mdp.n_states; ++s)
    mdp.initial[static_cast<Eigen::Index>(s)] = init[s].get<double>();

  const json& c = doc.at("thresholds");
  if (!c.is_array() || c.size() != m_count)
    fail(where + "/thresholds", "expected one threshold per constraint");
  mdp.c.resize(static_cast<Eigen::Index>(m_count));
  for (std::size_t i = 0; i < m_count; ++i)
    mdp.c[static_cast<Eigen::Index>(i)] = c[i].get<double>();

  try {
    mdp.validate();
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return mdp;
}

void save_cmdp(const TabularCmdp& mdp, const std::filesystem::path& path,
               const std::string& note) {
  json doc;
  doc["format_version"] = kCmdpFormatVersion;
  if (!note.empty()) doc["note"] = note;
  doc["n_states"] = mdp.n_states;
  doc["n_actions"] = mdp.n_actions;
  doc["gamma"] = mdp.gamma;
  doc["transitions"] = json::array();
  for (const auto& p : mdp.transitions) {
    json mat = json::array();
    for (Eigen::Index s = 0; s < p.rows(); ++s) {
      json row = json::array();
      for (Eigen::Index t = 0; t < p.cols(); ++t) row.push_back(p(s, t));
      mat.push_back(std::move(row));
    }
    doc["transitions"].push_back(std::move(mat));
  }
  auto matrix_to_json = [](const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index s = 0; s < m.rows(); ++s) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(s, j));
      out.push_back(std::move(row));
    }
    return out;
  };
  doc["rewards"] = matrix_to_json(mdp.rewards);
  doc["indicators"] = matrix_to_json(mdp.indicators);
  doc["initial"] = json::array();
  for (Eigen::Index s = 0; s < mdp.initial.size(); ++s) doc["initial"].push_back(mdp.initial[s]);
  doc["thresholds"] = json::array();
  for (Eigen::Index i = 0; i < mdp.c.size(); ++i) doc["thresholds"].push_back(mdp.c[i]);
  write_json_file(doc, path);
}

void save_checkpoint(const RbfGaussianPolicy& policy, const std::filesystem::path& path) {
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["type"] = "rbf_gaussian_policy";
  doc["sigma"] = policy.grid().sigma;
  doc["centers"] = json::array();
  for (Eigen::Index i = 0; i < policy.grid().centers.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index d = 0; d < policy.grid().centers.cols(); ++d)
      row.push_back(policy.grid().centers(i, d));
    doc["centers"].push_back(std::move(row));
  }
  doc["covariance_diag"] = json::array();
  for (Eigen::Index j = 0; j < policy.covariance_diag().size(); ++j)
    doc["covariance_diag"].push_back(policy.covariance_diag()[j]);
  doc["theta"] = json::array();  // row-major: one row per center
  for (Eigen::Index i = 0; i < policy.theta().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < policy.theta().cols(); ++j) row.push_back(policy.theta()(i, j));
    doc["theta"].push_back(std::move(row));
  }
  write_json_file(doc, path);
}

RbfGaussianPolicy load_checkpoint(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  const std::string where = path.string();
  check_version(doc, where, kCheckpointFormatVersion);
  require_keys(doc, where,
               {"format_version", "type", "sigma", "centers", "covariance_diag", "theta"}, {});
  if (doc.at("type").get<std::string>() != "rbf_gaussian_policy")
    fail(where + "/type", "not an RBF Gaussian policy checkpoint");

  RbfGrid grid;
  grid.sigma = get_number(doc, where, "sigma");
  const json& centers = doc.at("centers");
  if (!centers.is_array() || centers.empty()) fail(where + "/centers", "expected a non-empty array");
  const std::size_t dims = centers[0].size();
  grid.centers.resize(static_cast<Eigen::Index>(centers.size()), static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const json& row = centers[i];
    if (!row.is_array() || row.size() != dims)
      fail(where + "/centers/" + std::to_string(i), "row length mismatch");
    for (std::size_t d = 0; d < dims; ++d) {
      if (!row[d].is_number()) fail(where + "/centers", "expected numbers");
      grid.centers(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = row[d].get<double>();
    }
  }

  const json& cov = doc.at("covariance_diag");
  if (!cov.is_array() || cov.empty()) fail(where + "/covariance_diag", "expected a non-empty array");
  Eigen::VectorXd cov_diag(static_cast<Eigen::Index>(cov.size()));
  for (std::size_t j = 0; j < cov.size(); ++j) {
    if (!cov[j].is_number()) fail(where + "/covariance_diag", "expected numbers");
    cov_diag[static_cast<Eigen::Index>(j)] = cov[j].get<double>();
  }

  const json& theta = doc.at("theta");
  if (!theta.is_array() || theta.size() != centers.size())
    fail(where + "/theta", "expected one row per center");
  Eigen::MatrixXd theta_m(static_cast<Eigen::Index>(theta.size()),
                          static_cast<Eigen::Index>(cov.size()));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const json& row = theta[i];
    if (!row.is_array() || row.size() != cov.size())
      fail(where + "/theta/" + std::to_string(i), "row length mismatch");
    for (std::size_t j = 0; j < cov.size(); ++j) {
      if (!row[j].is_number()) fail(where + "/theta", "expected numbers");
      theta_m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
    }
  }

  try {
    return RbfGaussianPolicy(std::move(grid), std::move(theta_m), std::move(cov_diag));
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

std::vector<ConstraintSpec> resolve_constraints(const nav::NavScenario& scenario,
                                                const TrainConfig& training) {
  std::vector<ConstraintSpec> specs;
  specs.reserve(scenario.obstacles.size());
  for (std::size_t i = 0; i < scenario.obstacles.size(); ++i) {
    const nav::Obstacle& o = scenario.obstacles[i];
    if (o.raw_threshold) {
      specs.push_back(ConstraintSpec::raw(i, *o.raw_threshold, training.mode, training.gamma));
    } else if (training.mode == TaskMode::Episodic) {
      specs.push_back(ConstraintSpec::episodic(i, o.delta, training.episodic_horizon));
    } else {
      specs.push_back(ConstraintSpec::discounted(i, o.delta, training.gamma, o.t_safe));
    }
  }
  return specs;
}

RbfGaussianPolicy build_policy(const nav::NavScenario& scenario, const PolicySettings& settings) {
  RbfGrid grid = make_lattice_grid(scenario.domain_min, scenario.domain_max, settings.spacing,
                                   settings.sigma);
  RbfGaussianPolicy policy(std::move(grid), settings.covariance_diag);
  policy.set_feature_cutoff(settings.feature_cutoff);
  return policy;
}

void write_manifest(const RunConfig& config, const std::vector<ConstraintSpec>& specs,
                    const std::filesystem::path& path) {
  json doc;
  doc["artifact_version"] = kArtifactVersion;
  doc["trace_format_version"] = kTraceFormatVersion;
  doc["checkpoint_format_version"] = kCheckpointFormatVersion;
  doc["scenario_format_version"] = kScenarioFormatVersion;
  doc["algorithm"] = to_string(config.algorithm);
  doc["scenario_path"] = config.scenario_path.empty() ? "<built-in default>" : config.scenario_path;
  doc["eval_start_mode"] = config.eval_start_mode;

  const TrainConfig& t = config.training;
  json tr;
  tr["mode"] = t.mode == TaskMode::Episodic ? "episodic" : "continuing";
  tr["gamma"] = t.gamma;
  tr["episode_horizon"] = t.episodic_horizon;
  tr["eta_theta"] = t.eta_theta;
  tr["eta_lambda"] = t.eta_lambda;
  tr["iterations"] = t.iterations;
  tr["inner_iterations"] = t.inner_iterations;
  tr["seed"] = t.seed;
  tr["estimator_variant"] = t.variant == GradientVariant::Paper ? "paper" : "full-reinforce";
  tr["eval_cadence"] = t.eval_cadence;
  tr["eval_rollouts"] = t.eval_rollouts;
  tr["eval_horizon"] = t.eval_horizon;
  tr["batch_size"] = t.batch_size;
  tr["horizon_cap"] = t.horizon_cap >= 0 ? t.horizon_cap : HorizonSampler::default_cap(t.gamma);
  if (t.fixed_lambda) tr["fixed_lambda"] = *t.fixed_lambda;
  if (t.baseline) tr["baseline"] = *t.baseline;
  tr["step_decay"] = t.step_decay;
  tr["threads"] = t.threads;
  doc["training"] = std::move(tr);

  json pol;
  pol["spacing"] = config.policy.spacing;
  pol["sigma"] = config.policy.sigma;
  pol["covariance"] = json::array();
  for (Eigen::Index j = 0; j < config.policy.covariance_diag.size(); ++j)
    pol["covariance"].push_back(config.policy.covariance_diag[j]);
  pol["feature_cutoff"] = config.policy.feature_cutoff;
  doc["policy"] = std::move(pol);

  doc["constraints"] = json::array();
  for (const auto& spec : specs) {
    json js;
    js["index"] = spec.index;
    js["label"] = config.scenario.obstacles[spec.index].label;
    js["derivation"] = spec.derivation;
    if (spec.derivation != "raw") {
      js["delta"] = spec.delta;
      js["epsilon"] = spec.epsilon;
    }
    js["threshold"] = spec.threshold;
    doc["constraints"].push_back(std::move(js));
  }
  write_json_file(doc, path);
}

}  // namespace saferl::io
