#pragma once

// Monte Carlo estimates of cap, tube and Beta-tail probabilities, used to
// check the closed forms in measures.hpp. Sampling here is written
// separately from the library samplers.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparsecode/geometry.hpp"

namespace sparsecode {

inline constexpr Index kDefaultOracleSamples = 1000000;

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sqrt(p (1 - p) / n) at the estimate
  Index n = 0;
  std::uint64_t seed = 0;
};

/// Fraction of uniform points on S^{d-1} within distance r of e_1.
McEstimate mc_cap_measure(int d, double r, Index n, std::uint64_t seed);
/// Fraction of uniform points on S^{d-1} within distance r of the unit circle
/// in the first two coordinates.
McEstimate mc_tube_measure(int d, double r, Index n, std::uint64_t seed);
/// Fraction of Beta(alpha, beta) draws (as a gamma ratio) that are >= 1 - eps.
McEstimate mc_beta_tail(double alpha, double beta, double eps, Index n, std::uint64_t seed);

struct OracleCheck {
  std::string spec;
  std::string kind;  // cap_measure, tube_measure, beta_tail
  double value = 0.0;  // closed-form value (beta_tail without exact case: lower bound)
  std::optional<double> lower;
  std::optional<double> upper;
  McEstimate mc;
  // Signed distance from the closed form (or the nearest bound) in units of
  // the reference standard error; 0 inside the bounds.
  double z = 0.0;
  bool mc_pass = false;
  std::optional<double> expect;
  std::optional<bool> expect_pass;
  bool pass = false;
};

/// Runs one named check, e.g. "cap_measure d=6 r=0.3" or
/// "beta_tail alpha=1 beta=2 eps=0.5 expect 0.25". Throws ParameterError on
/// an unknown check name or malformed parameters.
///
/// The Monte Carlo band is 3 standard errors, with the standard error taken
/// at the closed-form probability for exact values and at the estimate for
/// bounds. An `expect` value must match the closed form within 1e-10.
OracleCheck run_oracle_check(const std::string& spec, Index n = kDefaultOracleSamples, std::uint64_t seed = 1);

/// The default parameter sweep: ten or more settings per closed form across
/// d = 4..10, plus the documented exact examples.
std::vector<std::string> default_oracle_suite();

nlohmann::json to_json(const OracleCheck& c);
std::string describe(const OracleCheck& c);

}  // namespace sparsecode
