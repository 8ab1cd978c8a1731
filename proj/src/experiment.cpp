#include "sparsecode/experiment.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace sparsecode {

using nlohmann::json;

Index KRule::resolve(Index m, int ambient_dim, int intrinsic_dim) const {
  switch (kind) {
    case Kind::Fixed:
      return k;
    case Kind::Log: {
      const double scale = times_dim ? double(ambient_dim) : 1.0;
      const double v = c * scale * std::log(double(m)) / std::log(log_base);
      // Guard against log(2^p)/log(2) landing a hair above an integer.
      const double rounded = std::round(v);
      const double kk = std::abs(v - rounded) < 1e-9 ? rounded : std::ceil(v);
      return std::max<Index>(1, static_cast<Index>(kk));
    }
    case Kind::HalfIntrinsic:
      return std::max<Index>(1, (intrinsic_dim + 1) / 2);
  }
  return 1;
}

Index SizeRule::resolve(Index m, Index k) const {
  if (fixed > 0) return fixed;
  return static_cast<Index>(std::ceil(per_cell * double(m) / double(k)));
}

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

void validate_size_rule(const SizeRule& r, const std::string& field) {
  require(r.fixed > 0 || r.per_cell > 0.0, field, "must be a positive count or per_cell > 0");
}

void validate_grid(const std::vector<Index>& grid, const std::string& field) {
  require(!grid.empty(), field, "must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] >= 1, field, "grid sizes must be >= 1");
    if (i > 0) require(grid[i] > grid[i - 1], field, "grid must be strictly increasing");
  }
}

void validate_dims(const ManifoldSpec& manifold, const DistributionSpec& dist, const std::string& prefix) {
  require(manifold.ambient_dim() == dist.dim(), prefix + "expansion", "dimension differs from manifold dimension");
  if (dist.kind() == DistributionKind::DataAttuned)
    require(*dist.manifold() == manifold, prefix + "expansion", "data-attuned rows must come from the input manifold");
}

}  // namespace

void ExperimentConfig::validate() const {
  const std::string p = label + ".";
  validate_dims(manifold, dist, p);
  validate_grid(m_grid, p + "m_grid");
  require(trials >= 1, p + "trials", "must be >= 1");
  require(n_test >= 1000, p + "n_test", "must be >= 1000");
  validate_size_rule(n_train, p + "n_train");
  validate_size_rule(n_cal, p + "n_cal");
  require(max_non_covered >= 0.0 && max_non_covered <= 1.0, p + "max_non_covered", "must lie in [0, 1]");
  if (k_rule.kind == KRule::Kind::Fixed) require(k_rule.k >= 1, p + "k_rule.k", "must be >= 1");
  if (k_rule.kind == KRule::Kind::Log) require(k_rule.c > 0.0 && k_rule.log_base > 1.0, p + "k_rule", "needs c > 0 and base > 1");
  if (goodness.mode() == GoodnessMode::ReachBand)
    require(goodness.manifold()->ambient_dim() == manifold.ambient_dim(), p + "goodness", "manifold dimension mismatch");
  if (target.kind() == TargetKind::Triangular)
    require(manifold.kind() == ManifoldKind::Circle, p + "target", "triangular target needs a circle manifold");
  if (target.kind() == TargetKind::Coordinate)
    require(target.axis() < manifold.ambient_dim(), p + "target.axis", "out of range");
  for (Index m : m_grid) {
    const Index k = k_for(m);
    require(k >= 1 && k <= m, p + "k_rule", "k = " + std::to_string(k) + " is outside [1, m] for m = " + std::to_string(m));
    if (scheme == Scheme::Threshold)
      require(n_cal.resolve(m, k) >= min_calibration_size(m, k), p + "n_cal",
              "must be >= 10 m / k for m = " + std::to_string(m));
  }
}

void UsageConfig::validate() const {
  const std::string p = label + ".";
  validate_dims(manifold, dist, p);
  validate_grid(m_grid, p + "m_grid");
  require(trials >= 1, p + "trials", "must be >= 1");
  require(probe_size >= 10000, p + "probe_size", "must be >= 10^4");
  validate_size_rule(n_cal, p + "n_cal");
  for (Index m : m_grid) {
    const Index k = k_for(m);
    require(k >= 1 && k <= m, p + "k_rule", "k = " + std::to_string(k) + " is outside [1, m] for m = " + std::to_string(m));
    if (scheme == Scheme::Threshold)
      require(n_cal.resolve(m, k) >= min_calibration_size(m, k), p + "n_cal",
              "must be >= 10 m / k for m = " + std::to_string(m));
  }
}

void ExperimentPlan::validate() const {
  std::set<std::string> labels;
  for (const auto& s : sweeps) {
    s.validate();
    require(labels.insert(s.label).second, s.label, "duplicate sweep label");
  }
  for (const auto& u : usage) {
    u.validate();
    require(labels.insert(u.label).second, u.label, "duplicate sweep label");
  }
  if (compare) {
    require(labels.count(compare->shallow) == 1, "compare.shallow", "unknown sweep label '" + compare->shallow + "'");
    require(labels.count(compare->steep) == 1, "compare.steep", "unknown sweep label '" + compare->steep + "'");
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(path + key, "missing");
  return j.at(key);
}

template <typename T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path, std::string("wrong type: ") + e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  return get_as<T>(j.at(key), path + key);
}

ManifoldSpec parse_manifold(const json& j, const std::string& path) {
  const auto kind = get_as<std::string>(field(j, "kind", path), path + "kind");
  const int d = get_as<int>(field(j, "dim", path), path + "dim");
  try {
    ManifoldSpec m = [&] {
      if (kind == "full_sphere") return ManifoldSpec::full_sphere(d);
      if (kind == "circle") return ManifoldSpec::circle(d);
      if (kind == "sub_sphere")
        return ManifoldSpec::sub_sphere(d, get_as<int>(field(j, "intrinsic_dim", path), path + "intrinsic_dim"));
      throw ConfigError(path + "kind", "unknown manifold kind '" + kind + "'");
    }();
    if (j.contains("regularity")) {
      const json& r = j.at("regularity");
      const std::string rp = path + "regularity.";
      m.set_regularity({get_or(r, "c1", 1.0, rp), get_or(r, "c2", 1.0, rp), get_or(r, "c3", 1.0, rp),
                        get_or(r, "r_o", 1.0, rp)});
    }
    return m;
  } catch (const ParameterError& e) {
    throw ConfigError(path + "dim", e.what());
  }
}

DistributionSpec parse_distribution(const json& j, const ManifoldSpec& manifold, const std::string& path) {
  const auto kind = get_as<std::string>(field(j, "kind", path), path + "kind");
  try {
    if (kind == "uniform_sphere") return DistributionSpec::uniform_sphere(manifold.ambient_dim());
    if (kind == "gaussian") return DistributionSpec::gaussian(manifold.ambient_dim(), get_or(j, "sigma", 1.0, path));
    if (kind == "data_attuned") return DistributionSpec::data_attuned(manifold);
  } catch (const ParameterError& e) {
    throw ConfigError(path + "sigma", e.what());
  }
  throw ConfigError(path + "kind", "unknown expansion kind '" + kind + "'");
}

TargetFunction parse_target(const json& j, const std::string& path) {
  const auto kind = get_as<std::string>(field(j, "kind", path), path + "kind");
  try {
    if (kind == "triangular") return TargetFunction::triangular(get_or(j, "lambda", 1.0, path));
    if (kind == "coordinate") return TargetFunction::coordinate(get_or(j, "axis", 0, path));
    if (kind == "cosine") {
      Eigen::VectorXd anchor;
      if (j.contains("anchor")) {
        const auto v = get_as<std::vector<double>>(j.at("anchor"), path + "anchor");
        anchor = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
      }
      return TargetFunction::cosine_to_point(get_or(j, "lambda", 1.0, path), anchor);
    }
    if (kind == "constant") return TargetFunction::constant(get_or(j, "value", 0.0, path));
  } catch (const ParameterError& e) {
    throw ConfigError(path + "kind", e.what());
  }
  throw ConfigError(path + "kind", "unknown target kind '" + kind + "'");
}

KRule parse_k_rule(const json& j, const std::string& path) {
  const auto kind = get_as<std::string>(field(j, "kind", path), path + "kind");
  if (kind == "fixed") return KRule::fixed(get_as<Index>(field(j, "k", path), path + "k"));
  if (kind == "half_intrinsic") return KRule::half_intrinsic();
  if (kind == "log") {
    double base = 2.0;
    if (j.contains("base")) {
      const json& b = j.at("base");
      if (b.is_string()) {
        if (b.get<std::string>() != "e") throw ConfigError(path + "base", "must be a number or \"e\"");
        base = std::numbers::e;
      } else {
        base = get_as<double>(b, path + "base");
      }
    }
    return KRule::log(get_or(j, "c", 1.0, path), base, get_or(j, "times_dim", false, path));
  }
  throw ConfigError(path + "kind", "unknown k rule '" + kind + "'");
}

SizeRule parse_size(const json& j, const std::string& path) {
  if (j.is_number_integer()) return SizeRule::count(get_as<Index>(j, path));
  if (j.is_object()) return SizeRule::per_cell_of(get_as<double>(field(j, "per_cell", path + "."), path + ".per_cell"));
  throw ConfigError(path, "must be an integer or {\"per_cell\": c}");
}

Scheme parse_scheme(const json& j, const std::string& path) {
  const auto s = get_as<std::string>(j, path);
  if (s == "wta") return Scheme::WTA;
  if (s == "threshold") return Scheme::Threshold;
  throw ConfigError(path, "must be \"wta\" or \"threshold\"");
}

std::vector<Index> parse_grid(const json& j, const std::string& path) { return get_as<std::vector<Index>>(j, path); }

ExperimentConfig parse_sweep(const json& j, std::uint64_t master_seed, const std::string& path) {
  ExperimentConfig c;
  c.label = get_as<std::string>(field(j, "label", path), path + "label");
  const std::string p = path;
  c.manifold = parse_manifold(field(j, "manifold", p), p + "manifold.");
  c.dist = parse_distribution(field(j, "expansion", p), c.manifold, p + "expansion.");
  c.scheme = parse_scheme(field(j, "scheme", p), p + "scheme");
  const auto goodness = get_or<std::string>(j, "goodness", "all_good", p);
  if (goodness == "all_good")
    c.goodness = GoodnessCriterion::all_good();
  else if (goodness == "reach_band")
    c.goodness = GoodnessCriterion::reach_band(c.manifold);
  else
    throw ConfigError(p + "goodness", "must be \"all_good\" or \"reach_band\"");
  c.target = parse_target(field(j, "target", p), p + "target.");
  c.m_grid = parse_grid(field(j, "m_grid", p), p + "m_grid");
  c.k_rule = parse_k_rule(field(j, "k_rule", p), p + "k_rule.");
  if (j.contains("n_train")) c.n_train = parse_size(j.at("n_train"), p + "n_train");
  if (j.contains("n_cal")) c.n_cal = parse_size(j.at("n_cal"), p + "n_cal");
  c.n_test = get_or<Index>(j, "n_test", c.n_test, p);
  c.trials = get_or(j, "trials", c.trials, p);
  c.master_seed = get_or<std::uint64_t>(j, "master_seed", master_seed, p);
  c.max_non_covered = get_or(j, "max_non_covered", c.max_non_covered, p);
  return c;
}

UsageConfig parse_usage(const json& j, std::uint64_t master_seed, const std::string& path) {
  UsageConfig c;
  const std::string p = path;
  c.label = get_as<std::string>(field(j, "label", p), p + "label");
  c.manifold = parse_manifold(field(j, "manifold", p), p + "manifold.");
  c.dist = parse_distribution(field(j, "expansion", p), c.manifold, p + "expansion.");
  c.scheme = parse_scheme(field(j, "scheme", p), p + "scheme");
  c.m_grid = parse_grid(field(j, "m_grid", p), p + "m_grid");
  c.k_rule = parse_k_rule(field(j, "k_rule", p), p + "k_rule.");
  if (j.contains("n_cal")) c.n_cal = parse_size(j.at("n_cal"), p + "n_cal");
  c.probe_size = get_or<Index>(j, "probe_size", c.probe_size, p);
  c.trials = get_or(j, "trials", c.trials, p);
  c.master_seed = get_or<std::uint64_t>(j, "master_seed", master_seed, p);
  return c;
}

}  // namespace

ExperimentPlan parse_plan(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  ExperimentPlan plan;
  plan.name = get_or<std::string>(j, "name", plan.name, "");
  plan.master_seed = get_as<std::uint64_t>(field(j, "master_seed", ""), "master_seed");
  if (j.contains("sweeps")) {
    const json& arr = j.at("sweeps");
    if (!arr.is_array()) throw ConfigError("sweeps", "must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      plan.sweeps.push_back(parse_sweep(arr[i], plan.master_seed, "sweeps[" + std::to_string(i) + "]."));
  }
  if (j.contains("usage")) {
    const json& arr = j.at("usage");
    if (!arr.is_array()) throw ConfigError("usage", "must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      plan.usage.push_back(parse_usage(arr[i], plan.master_seed, "usage[" + std::to_string(i) + "]."));
  }
  if (j.contains("compare")) {
    const json& c = j.at("compare");
    plan.compare = SlopeComparison{get_as<std::string>(field(c, "shallow", "compare."), "compare.shallow"),
                                   get_as<std::string>(field(c, "steep", "compare."), "compare.steep"),
                                   get_or(c, "min_gap", 0.3, "compare.")};
  }
  if (plan.sweeps.empty() && plan.usage.empty()) throw ConfigError("sweeps", "config defines no sweeps");
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_plan(j);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json manifold_json(const ManifoldSpec& m) {
  json j;
  switch (m.kind()) {
    case ManifoldKind::FullSphere: j["kind"] = "full_sphere"; break;
    case ManifoldKind::Circle: j["kind"] = "circle"; break;
    case ManifoldKind::SubSphere: j["kind"] = "sub_sphere"; break;
  }
  j["dim"] = m.ambient_dim();
  if (m.kind() == ManifoldKind::SubSphere) j["intrinsic_dim"] = m.intrinsic_dim();
  const auto& r = m.regularity();
  j["regularity"] = {{"c1", r.c1}, {"c2", r.c2}, {"c3", r.c3}, {"r_o", r.r_o}};
  return j;
}

json distribution_json(const DistributionSpec& d) {
  switch (d.kind()) {
    case DistributionKind::UniformSphere: return {{"kind", "uniform_sphere"}};
    case DistributionKind::Gaussian: return {{"kind", "gaussian"}, {"sigma", d.sigma()}};
    case DistributionKind::DataAttuned: return {{"kind", "data_attuned"}};
  }
  return {};
}

json target_json(const TargetFunction& f) {
  switch (f.kind()) {
    case TargetKind::Triangular: return {{"kind", "triangular"}, {"lambda", f.lipschitz()}};
    case TargetKind::Coordinate: return {{"kind", "coordinate"}, {"axis", f.axis()}};
    case TargetKind::CosineOfAngleToFixedPoint: {
      json j = {{"kind", "cosine"}, {"lambda", f.lipschitz()}};
      if (f.anchor().size() > 0) j["anchor"] = std::vector<double>(f.anchor().data(), f.anchor().data() + f.anchor().size());
      return j;
    }
    case TargetKind::Constant: return {{"kind", "constant"}, {"value", f.constant_value()}};
  }
  return {};
}

json k_rule_json(const KRule& r) {
  switch (r.kind) {
    case KRule::Kind::Fixed: return {{"kind", "fixed"}, {"k", r.k}};
    case KRule::Kind::HalfIntrinsic: return {{"kind", "half_intrinsic"}};
    case KRule::Kind::Log: {
      json j = {{"kind", "log"}, {"c", r.c}, {"times_dim", r.times_dim}};
      if (r.log_base == std::numbers::e)
        j["base"] = "e";
      else
        j["base"] = r.log_base;
      return j;
    }
  }
  return {};
}

json size_json(const SizeRule& s) {
  if (s.fixed > 0) return s.fixed;
  return {{"per_cell", s.per_cell}};
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json j;
  j["label"] = c.label;
  j["manifold"] = manifold_json(c.manifold);
  j["expansion"] = distribution_json(c.dist);
  j["scheme"] = to_string(c.scheme);
  j["goodness"] = c.goodness.mode() == GoodnessMode::AllGood ? "all_good" : "reach_band";
  j["target"] = target_json(c.target);
  j["m_grid"] = c.m_grid;
  j["k_rule"] = k_rule_json(c.k_rule);
  j["n_train"] = size_json(c.n_train);
  j["n_test"] = c.n_test;
  j["n_cal"] = size_json(c.n_cal);
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["max_non_covered"] = c.max_non_covered;
  return j;
}

json to_json(const UsageConfig& c) {
  json j;
  j["label"] = c.label;
  j["manifold"] = manifold_json(c.manifold);
  j["expansion"] = distribution_json(c.dist);
  j["scheme"] = to_string(c.scheme);
  j["m_grid"] = c.m_grid;
  j["k_rule"] = k_rule_json(c.k_rule);
  j["n_cal"] = size_json(c.n_cal);
  j["probe_size"] = c.probe_size;
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  return j;
}

json to_json(const ExperimentPlan& plan) {
  json j;
  j["name"] = plan.name;
  j["master_seed"] = plan.master_seed;
  j["sweeps"] = json::array();
  for (const auto& s : plan.sweeps) j["sweeps"].push_back(to_json(s));
  j["usage"] = json::array();
  for (const auto& u : plan.usage) j["usage"].push_back(to_json(u));
  if (plan.compare)
    j["compare"] = {{"shallow", plan.compare->shallow}, {"steep", plan.compare->steep}, {"min_gap", plan.compare->min_gap}};
  return j;
}

}  // namespace sparsecode
