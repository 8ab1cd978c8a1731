#pragma once

// Rate sweeps over an m grid, unit-usage probes and log-log slope fits.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sparsecode/approximator.hpp"
#include "sparsecode/encoder.hpp"
#include "sparsecode/experiment.hpp"

namespace sparsecode {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::optional<double> std_error;
  int n_points = 0;
};

/// Ordinary least squares of log(err) on log(m) over points with err > 0.
/// Throws FitError with fewer than three such points.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);

/// Seeds of one (m, trial) job. All streams derive from job.
struct JobSeeds {
  std::uint64_t job = 0;
  std::uint64_t expansion = 0;
  std::uint64_t calibration = 0;
  std::uint64_t training = 0;
  std::uint64_t test = 0;
  std::uint64_t probe = 0;
};

JobSeeds job_seeds(std::uint64_t master_seed, Index m, int trial);

struct TrialRecord {
  Index m = 0;
  Index k = 0;
  int trial = 0;
  JobSeeds seeds;
  Index n_train = 0;
  Index n_cal = 0;  // 0 under WTA
  Index good_units = 0;
  Index zero_count_units = 0;
  ErrorReport error;
  Index used_unit_count = 0;
};

/// Median over trials at one grid size.
struct GridPoint {
  Index m = 0;
  Index k = 0;
  double sup_err = 0.0;
  double mean_err = 0.0;
  double non_covered_fraction = 0.0;
  double used_unit_count = 0.0;
  double max_cell_diam = 0.0;
  bool valid = true;  // false when non_covered_fraction > config.max_non_covered
};

struct ScalingResult {
  std::string label;
  std::uint64_t master_seed = 0;
  std::vector<GridPoint> grid;
  std::vector<TrialRecord> trials;
  // Fit over valid points with sup_err > 0; none when fewer than three remain.
  std::optional<SlopeFit> fit;
  std::string fit_note;
  // Same fit ignoring the validity flag. Diagnostic only.
  std::optional<SlopeFit> unfiltered_fit;
  // Grid steps where the median sup_err increases.
  int inversions = 0;
  bool monotone_flag = false;  // more than one inversion

  bool all_valid() const;
  std::optional<double> fitted_slope() const { return fit ? std::optional<double>(fit->slope) : std::nullopt; }
};

double median(std::vector<double> v);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
/// written by index; the first exception (lowest i) is rethrown.
void parallel_for(Index n, int threads, const std::function<void(Index)>& fn);

/// Worker count from an explicit value, else SPARSECODE_THREADS, else the
/// hardware concurrency.
int resolve_threads(std::optional<int> requested);

/// One (m, trial) job of a rate sweep: build, calibrate if needed, learn, test.
TrialRecord run_rate_trial(const ExperimentConfig& config, Index m, int trial);

/// Full sweep: every grid size and trial, median-aggregated, with a slope fit.
ScalingResult run_rate_sweep(const ExperimentConfig& config, int threads = 1);

struct UsageProfile {
  CountVector per_unit_fire_count;
  Index ever_used_count = 0;
  Index probe_size = 0;
};

/// Fire counts over probe_size >= 10^4 fresh samples of the manifold.
UsageProfile run_usage_probe(const ExpansionMatrixd& theta, const Sparsifierd& sparsifier, const ManifoldSpec& manifold,
                             Index probe_size, std::uint64_t seed);

struct UsageTrial {
  Index m = 0;
  Index k = 0;
  int trial = 0;
  JobSeeds seeds;
  Index n_cal = 0;
  Index ever_used_count = 0;
  std::int64_t min_fire_count = 0;
};

struct UsagePoint {
  Index m = 0;
  Index k = 0;
  double ever_used_count = 0.0;  // median over trials
  double ever_used_fraction = 0.0;
  std::int64_t min_fire_count = 0;  // minimum over trials and units
};

struct UsageResult {
  std::string label;
  std::uint64_t master_seed = 0;
  std::vector<UsagePoint> grid;
  std::vector<UsageTrial> trials;
  // log ever_used_count against log m; none with fewer than three grid sizes.
  std::optional<SlopeFit> fit;
  std::string fit_note;

  bool every_unit_fired() const;
};

UsageResult usage_scaling(const UsageConfig& config, int threads = 1);

/// Sparsifier for (theta, k) under `scheme`, calibrating thresholds on the
/// manifold when needed.
Sparsifierd make_sparsifier(Scheme scheme, const ExpansionMatrixd& theta, const ManifoldSpec& manifold, Index k,
                            Index n_cal, std::uint64_t calibration_seed);

}  // namespace sparsecode
