#pragma once

// Experiment configuration: one rate sweep or usage sweep per ExperimentConfig
// / UsageConfig, grouped into a plan that is read from and echoed back to JSON.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparsecode/approximator.hpp"
#include "sparsecode/encoder.hpp"
#include "sparsecode/geometry.hpp"

namespace sparsecode {

/// How k is chosen for each grid size m.
struct KRule {
  enum class Kind { Fixed, Log, HalfIntrinsic };
  Kind kind = Kind::Fixed;
  Index k = 1;             // Fixed
  double c = 1.0;          // Log: k = ceil(c * (times_dim ? d : 1) * log_base(m))
  double log_base = 2.0;   // 2 or e
  bool times_dim = false;

  static KRule fixed(Index k) { return {Kind::Fixed, k}; }
  static KRule log(double c, double base, bool times_dim) { return {Kind::Log, 1, c, base, times_dim}; }
  static KRule half_intrinsic() { return {Kind::HalfIntrinsic}; }

  Index resolve(Index m, int ambient_dim, int intrinsic_dim) const;
};

/// A sample size given either as a fixed count or as per_cell * m / k.
struct SizeRule {
  Index fixed = 0;
  double per_cell = 0.0;

  static SizeRule count(Index n) { return {n, 0.0}; }
  static SizeRule per_cell_of(double c) { return {0, c}; }

  Index resolve(Index m, Index k) const;
};

struct ExperimentConfig {
  std::string label = "sweep";
  ManifoldSpec manifold = ManifoldSpec::full_sphere(3);
  DistributionSpec dist = DistributionSpec::uniform_sphere(3);
  Scheme scheme = Scheme::WTA;
  GoodnessCriterion goodness = GoodnessCriterion::all_good();
  TargetFunction target = TargetFunction::coordinate(0);
  std::vector<Index> m_grid = {256, 512, 1024, 2048, 4096, 8192, 16384};
  KRule k_rule = KRule::fixed(1);
  SizeRule n_train = SizeRule::per_cell_of(200.0);
  Index n_test = 20000;
  SizeRule n_cal = SizeRule::per_cell_of(100.0);
  int trials = 5;
  std::uint64_t master_seed = 0;
  // Grid points whose median non-covered fraction exceeds this are excluded from the slope fit.
  double max_non_covered = 0.2;

  Index k_for(Index m) const { return k_rule.resolve(m, manifold.ambient_dim(), manifold.intrinsic_dim()); }

  // Throws ConfigError naming the offending field.
  void validate() const;
};

/// Fire-count probe over an m grid (used-unit scaling, or full usage under thresholding).
struct UsageConfig {
  std::string label = "usage";
  ManifoldSpec manifold = ManifoldSpec::circle(5);
  DistributionSpec dist = DistributionSpec::uniform_sphere(5);
  Scheme scheme = Scheme::WTA;
  std::vector<Index> m_grid = {1024, 2048, 4096, 8192, 16384, 32768, 65536};
  KRule k_rule = KRule::fixed(1);
  SizeRule n_cal = SizeRule::per_cell_of(100.0);
  Index probe_size = 100000;
  int trials = 3;
  std::uint64_t master_seed = 0;

  Index k_for(Index m) const { return k_rule.resolve(m, manifold.ambient_dim(), manifold.intrinsic_dim()); }
  void validate() const;
};

/// Slope gap between two labelled rate sweeps: shallow - steep >= min_gap.
struct SlopeComparison {
  std::string shallow;
  std::string steep;
  double min_gap = 0.3;
};

struct ExperimentPlan {
  std::string name = "plan";
  std::uint64_t master_seed = 0;
  std::vector<ExperimentConfig> sweeps;
  std::vector<UsageConfig> usage;
  std::optional<SlopeComparison> compare;

  void validate() const;
};

// JSON conversion. Parsing throws ConfigError with the key path of the bad field.
ExperimentPlan parse_plan(const nlohmann::json& j);
ExperimentPlan load_plan(const std::string& path);
nlohmann::json to_json(const ExperimentPlan& plan);
nlohmann::json to_json(const ExperimentConfig& c);
nlohmann::json to_json(const UsageConfig& c);

}  // namespace sparsecode
