#include "sparsecode/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

namespace sparsecode {

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  std::vector<double> xs, ys;
  for (const auto& [m, err] : points) {
    if (err > 0.0 && m > 0.0 && std::isfinite(err)) {
      xs.push_back(std::log(m));
      ys.push_back(std::log(err));
    }
  }
  const Index n = static_cast<Index>(xs.size());
  if (n < 3) throw FitError("fit_slope: need at least 3 points with err > 0 (got " + std::to_string(n) + ")");
  const Eigen::Map<const Eigen::VectorXd> x(xs.data(), n), y(ys.data(), n);
  const double xm = x.mean(), ym = y.mean();
  const double sxx = (x.array() - xm).square().sum();
  if (!(sxx > 0.0)) throw FitError("fit_slope: all m values are equal");
  const double sxy = ((x.array() - xm) * (y.array() - ym)).sum();
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  fit.n_points = static_cast<int>(n);
  const double rss = (y.array() - fit.intercept - fit.slope * x.array()).square().sum();
  fit.std_error = std::sqrt(rss / double(n - 2) / sxx);
  return fit;
}

JobSeeds job_seeds(std::uint64_t master_seed, Index m, int trial) {
  JobSeeds s;
  s.job = derive_seed(master_seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial)});
  s.expansion = stream_seed(s.job, Stream::Expansion);
  s.calibration = stream_seed(s.job, Stream::Calibration);
  s.training = stream_seed(s.job, Stream::Training);
  s.test = stream_seed(s.job, Stream::Test);
  s.probe = stream_seed(s.job, Stream::Probe);
  return s;
}

double median(std::vector<double> v) {
  if (v.empty()) throw ParameterError("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

bool ScalingResult::all_valid() const {
  return std::all_of(grid.begin(), grid.end(), [](const GridPoint& g) { return g.valid; });
}

bool UsageResult::every_unit_fired() const {
  return !grid.empty() &&
         std::all_of(grid.begin(), grid.end(), [](const UsagePoint& p) { return p.min_fire_count > 0; });
}

void parallel_for(Index n, int threads, const std::function<void(Index)>& fn) {
  const int workers = static_cast<int>(std::clamp<Index>(threads, 1, std::max<Index>(n, 1)));
  if (workers == 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::mutex mu;
  Index failed_at = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (Index i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

int resolve_threads(std::optional<int> requested) {
  if (requested) {
    if (*requested < 1) throw ParameterError("--threads must be >= 1");
    return *requested;
  }
  if (const char* env = std::getenv("SPARSECODE_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ParameterError("SPARSECODE_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

Sparsifierd make_sparsifier(Scheme scheme, const ExpansionMatrixd& theta, const ManifoldSpec& manifold, Index k,
                            Index n_cal, std::uint64_t calibration_seed) {
  if (scheme == Scheme::WTA) return Sparsifierd::winner_take_all(k);
  return Sparsifierd::threshold(calibrate_thresholds<double>(theta, manifold, k, n_cal, calibration_seed));
}

TrialRecord run_rate_trial(const ExperimentConfig& config, Index m, int trial) {
  TrialRecord r;
  r.m = m;
  r.k = config.k_for(m);
  r.trial = trial;
  r.seeds = job_seeds(config.master_seed, m, trial);
  r.n_train = config.n_train.resolve(m, r.k);
  auto theta = std::make_shared<const ExpansionMatrixd>(build_expansion<double>(config.dist, m, r.seeds.expansion));
  if (config.scheme == Scheme::Threshold) r.n_cal = config.n_cal.resolve(m, r.k);
  const Sparsifierd s = make_sparsifier(config.scheme, *theta, config.manifold, r.k, r.n_cal, r.seeds.calibration);
  const ApproximatorModel model =
      learn_weights(theta, s, config.target, config.manifold, r.n_train, r.seeds.training, config.goodness);
  r.good_units = model.good_mask().count();
  r.zero_count_units = static_cast<Index>(model.zero_count_units().size());
  r.used_unit_count = model.used_unit_count();
  r.error = sup_error(model, config.target, config.manifold, config.n_test, r.seeds.test);
  return r;
}

namespace {

std::optional<SlopeFit> try_fit(const std::vector<std::pair<double, double>>& pts, std::string* note) {
  try {
    return fit_slope(pts);
  } catch (const FitError& e) {
    if (note) *note = e.what();
    return std::nullopt;
  }
}

}  // namespace

ScalingResult run_rate_sweep(const ExperimentConfig& config, int threads) {
  config.validate();
  const Index G = static_cast<Index>(config.m_grid.size());
  const Index T = config.trials;
  ScalingResult result;
  result.label = config.label;
  result.master_seed = config.master_seed;
  result.trials.resize(static_cast<std::size_t>(G * T));
  parallel_for(G * T, threads, [&](Index i) {
    result.trials[i] = run_rate_trial(config, config.m_grid[i / T], static_cast<int>(i % T));
  });

  for (Index g = 0; g < G; ++g) {
    std::vector<double> sup, mean, nc, used, diam;
    for (Index t = 0; t < T; ++t) {
      const TrialRecord& r = result.trials[g * T + t];
      sup.push_back(r.error.sup_abs_err);
      mean.push_back(r.error.mean_abs_err);
      nc.push_back(r.error.non_covered_fraction);
      used.push_back(double(r.used_unit_count));
      diam.push_back(r.error.max_cell_diam);
    }
    GridPoint p;
    p.m = config.m_grid[g];
    p.k = config.k_for(p.m);
    p.sup_err = median(sup);
    p.mean_err = median(mean);
    p.non_covered_fraction = median(nc);
    p.used_unit_count = median(used);
    p.max_cell_diam = median(diam);
    p.valid = p.non_covered_fraction <= config.max_non_covered;
    result.grid.push_back(p);
  }

  std::vector<std::pair<double, double>> valid_pts, all_pts;
  for (const GridPoint& p : result.grid) {
    all_pts.emplace_back(double(p.m), p.sup_err);
    if (p.valid) valid_pts.emplace_back(double(p.m), p.sup_err);
  }
  result.fit = try_fit(valid_pts, &result.fit_note);
  if (!result.fit && valid_pts.size() < all_pts.size())
    result.fit_note = std::to_string(all_pts.size() - valid_pts.size()) + " of " + std::to_string(all_pts.size()) +
                      " grid points exceed the non-coverage limit; " + result.fit_note;
  result.unfiltered_fit = try_fit(all_pts, nullptr);
  for (std::size_t g = 1; g < result.grid.size(); ++g)
    if (result.grid[g].sup_err > result.grid[g - 1].sup_err) ++result.inversions;
  result.monotone_flag = result.inversions > 1;
  return result;
}

UsageProfile run_usage_probe(const ExpansionMatrixd& theta, const Sparsifierd& sparsifier, const ManifoldSpec& manifold,
                             Index probe_size, std::uint64_t seed) {
  if (probe_size < 10000) throw ParameterError("run_usage_probe: probe_size must be >= 10^4");
  if (manifold.ambient_dim() != theta.dim()) throw ShapeError("run_usage_probe: manifold dimension differs from Theta");
  constexpr Index kChunk = 8192;
  UsageProfile u;
  u.probe_size = probe_size;
  u.per_unit_fire_count = CountVector::Zero(theta.m());
  ManifoldSampler sampler(manifold, seed);
  Eigen::MatrixXd X;
  for (Index done = 0; done < probe_size; done += kChunk) {
    X = sampler.next(std::min(kChunk, probe_size - done));
    encode_batch<double>(theta, sparsifier, X, [&](Index, std::span<const Index> active) {
      for (Index j : active) ++u.per_unit_fire_count[j];
    });
  }
  u.ever_used_count = (u.per_unit_fire_count.array() > 0).count();
  return u;
}

UsageResult usage_scaling(const UsageConfig& config, int threads) {
  config.validate();
  const Index G = static_cast<Index>(config.m_grid.size());
  const Index T = config.trials;
  UsageResult result;
  result.label = config.label;
  result.master_seed = config.master_seed;
  result.trials.resize(static_cast<std::size_t>(G * T));
  parallel_for(G * T, threads, [&](Index i) {
    UsageTrial& r = result.trials[i];
    r.m = config.m_grid[i / T];
    r.k = config.k_for(r.m);
    r.trial = static_cast<int>(i % T);
    r.seeds = job_seeds(config.master_seed, r.m, r.trial);
    if (config.scheme == Scheme::Threshold) r.n_cal = config.n_cal.resolve(r.m, r.k);
    const ExpansionMatrixd theta = build_expansion<double>(config.dist, r.m, r.seeds.expansion);
    const Sparsifierd s = make_sparsifier(config.scheme, theta, config.manifold, r.k, r.n_cal, r.seeds.calibration);
    const UsageProfile u = run_usage_probe(theta, s, config.manifold, config.probe_size, r.seeds.probe);
    r.ever_used_count = u.ever_used_count;
    r.min_fire_count = u.per_unit_fire_count.minCoeff();
  });

  std::vector<std::pair<double, double>> pts;
  for (Index g = 0; g < G; ++g) {
    UsagePoint p;
    p.m = config.m_grid[g];
    p.k = config.k_for(p.m);
    std::vector<double> used;
    p.min_fire_count = result.trials[g * T].min_fire_count;
    for (Index t = 0; t < T; ++t) {
      const UsageTrial& r = result.trials[g * T + t];
      used.push_back(double(r.ever_used_count));
      p.min_fire_count = std::min(p.min_fire_count, r.min_fire_count);
    }
    p.ever_used_count = median(used);
    p.ever_used_fraction = p.ever_used_count / double(p.m);
    result.grid.push_back(p);
    pts.emplace_back(double(p.m), p.ever_used_count);
  }
  result.fit = try_fit(pts, &result.fit_note);
  return result;
}

}  // namespace sparsecode
