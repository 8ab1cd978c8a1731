#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <random>
#include <stdexcept>

#include "sparsecode/metrics.hpp"

using namespace sparsecode;

TEST(FitSlope, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (double m : {256.0, 512.0, 1024.0, 2048.0}) pts.emplace_back(m, 3.0 * std::pow(m, -0.5));
  const SlopeFit f = fit_slope(pts);
  EXPECT_NEAR(f.slope, -0.5, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-10);
  ASSERT_TRUE(f.std_error);
  EXPECT_NEAR(*f.std_error, 0.0, 1e-10);
  EXPECT_EQ(f.n_points, 4);
}

TEST(FitSlope, ConstantSeriesHasZeroSlope) {
  const SlopeFit f = fit_slope({{10, 0.7}, {100, 0.7}, {1000, 0.7}});
  EXPECT_NEAR(f.slope, 0.0, 1e-12);
}

TEST(FitSlope, NoisyPowerLaw) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.95, 1.05);
  std::vector<std::pair<double, double>> pts;
  for (int e = 8; e <= 20; ++e) {
    const double m = std::ldexp(1.0, e);
    pts.emplace_back(m, u(rng) / m);
  }
  EXPECT_NEAR(fit_slope(pts).slope, -1.0, 0.05);
}

TEST(FitSlope, RejectsTooFewPositivePoints) {
  EXPECT_THROW(fit_slope({{1, 1}, {2, 0.5}}), FitError);
  EXPECT_THROW(fit_slope({{1, 1}, {2, 0.5}, {4, 0.0}}), FitError);
}

TEST(Median, OddEvenAndEmpty) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_THROW(median({}), ParameterError);
}

TEST(ParallelFor, WritesByIndexAndRethrowsLowest) {
  std::vector<int> out(100, 0);
  parallel_for(100, 4, [&](Index i) { out[i] = int(i) * 2; });
  for (int i = 0; i < 100; ++i) EXPECT_EQ(out[i], 2 * i);
  try {
    parallel_for(50, 3, [](Index i) {
      if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

TEST(ResolveThreads, ExplicitThenEnvironment) {
  EXPECT_EQ(resolve_threads(3), 3);
  ::setenv("SPARSECODE_THREADS", "5", 1);
  EXPECT_EQ(resolve_threads(std::nullopt), 5);
  ::unsetenv("SPARSECODE_THREADS");
  EXPECT_GE(resolve_threads(std::nullopt), 1);
  EXPECT_THROW(resolve_threads(0), ParameterError);
}

TEST(JobSeeds, DistinctStreams) {
  const JobSeeds a = job_seeds(1, 256, 0), b = job_seeds(1, 256, 1), c = job_seeds(1, 512, 0);
  EXPECT_NE(a.job, b.job);
  EXPECT_NE(a.job, c.job);
  EXPECT_NE(a.expansion, a.training);
  EXPECT_NE(a.training, a.test);
  EXPECT_EQ(a.expansion, stream_seed(a.job, Stream::Expansion));
  EXPECT_EQ(job_seeds(1, 256, 0).test, a.test);
}

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.label = "small";
  c.manifold = ManifoldSpec::full_sphere(3);
  c.dist = DistributionSpec::uniform_sphere(3);
  c.target = TargetFunction::coordinate(0);
  c.m_grid = {64, 128, 256, 512};
  c.k_rule = KRule::fixed(4);
  c.n_train = SizeRule::per_cell_of(100);
  c.n_test = 1000;
  c.trials = 2;
  c.master_seed = 77;
  return c;
}

}  // namespace

TEST(RateSweep, ConstantTargetHasNoSlope) {
  ExperimentConfig c = small_config();
  c.target = TargetFunction::constant(1.5);
  const ScalingResult r = run_rate_sweep(c, 1);
  EXPECT_FALSE(r.fit);
  EXPECT_FALSE(r.fit_note.empty());
  for (const auto& p : r.grid) EXPECT_EQ(p.sup_err, 0.0);
}

TEST(RateSweep, ShapeAndScheduleIndependence) {
  const ExperimentConfig c = small_config();
  const ScalingResult a = run_rate_sweep(c, 1);
  const ScalingResult b = run_rate_sweep(c, 3);
  ASSERT_EQ(a.grid.size(), 4u);
  ASSERT_EQ(a.trials.size(), 8u);
  ASSERT_TRUE(a.fit);
  EXPECT_LT(*a.fitted_slope(), 0.0);
  EXPECT_EQ(*a.fitted_slope(), *b.fitted_slope());
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    EXPECT_EQ(a.grid[i].sup_err, b.grid[i].sup_err);
    EXPECT_EQ(a.grid[i].mean_err, b.grid[i].mean_err);
  }
  for (std::size_t i = 0; i < a.trials.size(); ++i) EXPECT_EQ(a.trials[i].seeds.job, b.trials[i].seeds.job);
  EXPECT_TRUE(a.all_valid());
}

TEST(RateSweep, TrialMatchesSeedStreams) {
  const ExperimentConfig c = small_config();
  const TrialRecord t = run_rate_trial(c, 128, 1);
  EXPECT_EQ(t.seeds.job, job_seeds(c.master_seed, 128, 1).job);
  EXPECT_EQ(t.n_train, 100 * 128 / 4);
  EXPECT_EQ(t.n_cal, 0);
  EXPECT_EQ(t.error.n_test, 1000);
}

TEST(UsageProbe, ContractAndLimits) {
  const ManifoldSpec circle = ManifoldSpec::circle(8);
  const auto theta = build_expansion<double>(DistributionSpec::uniform_sphere(8), 64, 3);
  const UsageProfile all = run_usage_probe(theta, Sparsifierd::winner_take_all(64), circle, 10000, 4);
  EXPECT_EQ(all.ever_used_count, 64);
  EXPECT_EQ(all.per_unit_fire_count.sum(), 64 * 10000);
  EXPECT_THROW(run_usage_probe(theta, Sparsifierd::winner_take_all(1), circle, 9999, 4), ParameterError);
}

TEST(UsageProbe, FewUnitsUsedOnLowDimensionalManifold) {
  const ManifoldSpec circle = ManifoldSpec::circle(8);
  const auto theta = build_expansion<double>(DistributionSpec::uniform_sphere(8), 1 << 14, 5);
  const UsageProfile p = run_usage_probe(theta, Sparsifierd::winner_take_all(1), circle, 100000, 6);
  EXPECT_LT(double(p.ever_used_count) / double(1 << 14), 0.05);
  EXPECT_EQ(p.per_unit_fire_count.sum(), 100000);
}

TEST(UsageProbe, MostUnitsUsedOnFullSphere) {
  const ManifoldSpec sphere = ManifoldSpec::full_sphere(3);
  const auto theta = build_expansion<double>(DistributionSpec::uniform_sphere(3), 256, 7);
  const UsageProfile p = run_usage_probe(theta, Sparsifierd::winner_take_all(1), sphere, 100000, 8);
  EXPECT_EQ(p.ever_used_count, 256);
}

TEST(UsageScaling, DeterministicAcrossThreads) {
  UsageConfig u;
  u.label = "u";
  u.m_grid = {256, 512, 1024};
  u.probe_size = 10000;
  u.trials = 2;
  u.master_seed = 9;
  const UsageResult a = usage_scaling(u, 1), b = usage_scaling(u, 2);
  ASSERT_TRUE(a.fit);
  EXPECT_EQ(a.fit->slope, b.fit->slope);
  ASSERT_EQ(a.grid.size(), 3u);
  for (std::size_t i = 0; i < a.grid.size(); ++i) EXPECT_EQ(a.grid[i].ever_used_count, b.grid[i].ever_used_count);
  EXPECT_LT(a.fit->slope, 1.0);
}

TEST(UsageScaling, ThresholdFiresEveryUnit) {
  UsageConfig u;
  u.label = "t";
  u.scheme = Scheme::Threshold;
  u.dist = DistributionSpec::uniform_sphere(5);
  u.m_grid = {128};
  u.k_rule = KRule::fixed(8);
  u.probe_size = 100000;
  u.trials = 1;
  u.master_seed = 10;
  const UsageResult r = usage_scaling(u, 1);
  EXPECT_TRUE(r.every_unit_fired());
  EXPECT_FALSE(r.fit);
}
