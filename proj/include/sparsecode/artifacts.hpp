#pragma once

// Running a whole plan and writing its CSV / JSON artifacts. Schemas are
// described in docs/formats.md.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparsecode/experiment.hpp"
#include "sparsecode/metrics.hpp"

namespace sparsecode {

inline constexpr int kArtifactSchemaVersion = 1;

struct ComparisonResult {
  std::string shallow;
  std::string steep;
  std::optional<double> shallow_slope;
  std::optional<double> steep_slope;
  std::optional<double> gap;  // shallow - steep, when both slopes exist
  double min_gap = 0.0;
  bool pass = false;
};

struct PlanResult {
  std::vector<ScalingResult> sweeps;
  std::vector<UsageResult> usage;
  std::optional<ComparisonResult> compare;

  // True when any rate-sweep grid point was flagged invalid.
  bool any_invalid() const;
};

PlanResult run_plan(const ExperimentPlan& plan, int threads);

/// %.17g; enough digits to round-trip a double.
std::string format_double(double v);

std::string scaling_csv(const ScalingResult& r);
std::string trials_csv(const ScalingResult& r);
std::string usage_csv(const UsageResult& r);

nlohmann::json to_json(const SlopeFit& f);
nlohmann::json to_json(const ScalingResult& r);
nlohmann::json to_json(const UsageResult& r);
nlohmann::json summary_json(const ExperimentPlan& plan, const PlanResult& result);

/// Writes <label>.csv and <label>_trials.csv per rate sweep, <label>.csv per
/// usage sweep, and summary.json. Returns the paths written, in order.
std::vector<std::filesystem::path> write_artifacts(const std::filesystem::path& dir, const ExperimentPlan& plan,
                                                   const PlanResult& result);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sparsecode
