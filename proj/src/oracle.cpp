#include "sparsecode/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "sparsecode/measures.hpp"
#include "sparsecode/random.hpp"

namespace sparsecode {
namespace {

McEstimate finish(Index hits, Index n, std::uint64_t seed) {
  McEstimate e;
  e.n = n;
  e.seed = seed;
  e.mean = double(hits) / double(n);
  e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / double(n));
  return e;
}

void check_n(Index n) {
  if (n < 1) throw ParameterError("Monte Carlo sample count must be >= 1");
}

}  // namespace

McEstimate mc_cap_measure(int d, double r, Index n, std::uint64_t seed) {
  check_n(n);
  if (d < 2) throw ParameterError("mc_cap_measure: d must be >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(static_cast<std::size_t>(d));
  Index hits = 0;
  for (Index i = 0; i < n; ++i) {
    double n2 = 0.0;
    for (double& v : x) {
      v = g(rng);
      n2 += v * v;
    }
    const double inv = 1.0 / std::sqrt(n2);
    double dist2 = 0.0;
    for (int c = 0; c < d; ++c) {
      const double diff = x[c] * inv - (c == 0 ? 1.0 : 0.0);
      dist2 += diff * diff;
    }
    if (dist2 <= r * r) ++hits;
  }
  return finish(hits, n, seed);
}

McEstimate mc_tube_measure(int d, double r, Index n, std::uint64_t seed) {
  check_n(n);
  if (d < 3) throw ParameterError("mc_tube_measure: d must be >= 3");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(static_cast<std::size_t>(d));
  Index hits = 0;
  for (Index i = 0; i < n; ++i) {
    double n2 = 0.0;
    for (double& v : x) {
      v = g(rng);
      n2 += v * v;
    }
    const double inv = 1.0 / std::sqrt(n2);
    // Nearest circle point is (x1, x2) / |(x1, x2)|.
    const double a = x[0] * inv, b = x[1] * inv;
    const double rho = std::hypot(a, b);
    double dist2 = 0.0;
    if (rho > 0.0) {
      dist2 = (a - a / rho) * (a - a / rho) + (b - b / rho) * (b - b / rho);
    } else {
      dist2 = 1.0;
    }
    for (int c = 2; c < d; ++c) dist2 += (x[c] * inv) * (x[c] * inv);
    if (dist2 <= r * r) ++hits;
  }
  return finish(hits, n, seed);
}

McEstimate mc_beta_tail(double alpha, double beta, double eps, Index n, std::uint64_t seed) {
  check_n(n);
  if (!(alpha > 0.0 && beta > 0.0)) throw ParameterError("mc_beta_tail: alpha and beta must be > 0");
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> ga(alpha, 1.0), gb(beta, 1.0);
  Index hits = 0;
  for (Index i = 0; i < n; ++i) {
    const double u = ga(rng), v = gb(rng);
    // Z >= 1 - eps  <=>  v <= eps (u + v); avoids rounding u / (u + v) near 1.
    if (v <= eps * (u + v)) ++hits;
  }
  return finish(hits, n, seed);
}

namespace {

struct ParsedSpec {
  std::string kind;
  std::map<std::string, double> params;
  std::optional<double> expect;
};

double parse_number(const std::string& s, const std::string& spec) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ParameterError("oracle check '" + spec + "': bad number '" + s + "'");
  return v;
}

ParsedSpec parse_spec(const std::string& spec) {
  std::istringstream is(spec);
  ParsedSpec p;
  if (!(is >> p.kind)) throw ParameterError("empty oracle check name");
  std::string tok;
  while (is >> tok) {
    if (tok == "expect") {
      std::string v;
      if (!(is >> v)) throw ParameterError("oracle check '" + spec + "': expect needs a value");
      p.expect = parse_number(v, spec);
      continue;
    }
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParameterError("oracle check '" + spec + "': expected key=value, got '" + tok + "'");
    p.params[tok.substr(0, eq)] = parse_number(tok.substr(eq + 1), spec);
  }
  return p;
}

double param(const ParsedSpec& p, const std::string& key, const std::string& spec) {
  const auto it = p.params.find(key);
  if (it == p.params.end()) throw ParameterError("oracle check '" + spec + "': missing parameter " + key);
  return it->second;
}

int int_param(const ParsedSpec& p, const std::string& key, const std::string& spec) {
  const double v = param(p, key, spec);
  if (v != std::floor(v)) throw ParameterError("oracle check '" + spec + "': " + key + " must be an integer");
  return static_cast<int>(v);
}

void check_keys(const ParsedSpec& p, std::initializer_list<const char*> keys, const std::string& spec) {
  for (const auto& [k, v] : p.params) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw ParameterError("oracle check '" + spec + "': unknown parameter " + k);
  }
}

void judge_exact(OracleCheck& c) {
  const double p = c.value;
  const double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / double(c.mc.n));
  const double diff = c.mc.mean - p;
  c.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
  c.mc_pass = std::abs(diff) <= 3.0 * se;
}

void judge_bounds(OracleCheck& c) {
  const double se = c.mc.std_error;
  const double lo = *c.lower, hi = *c.upper;
  const double x = c.mc.mean;
  double dist = 0.0;
  if (x < lo) dist = x - lo;
  if (x > hi) dist = x - hi;
  c.z = se > 0.0 ? dist / se : (dist == 0.0 ? 0.0 : INFINITY);
  c.mc_pass = std::abs(dist) <= 3.0 * se;
}

}  // namespace

OracleCheck run_oracle_check(const std::string& spec, Index n, std::uint64_t seed) {
  const ParsedSpec p = parse_spec(spec);
  OracleCheck c;
  c.spec = spec;
  c.kind = p.kind;
  c.expect = p.expect;
  if (p.kind == "cap_measure") {
    check_keys(p, {"d", "r"}, spec);
    const int d = int_param(p, "d", spec);
    const double r = param(p, "r", spec);
    const CapMeasure cm = cap_measure_exact(d, r);
    c.value = cm.exact;
    c.lower = cm.lower_bound;
    c.mc = mc_cap_measure(d, r, n, seed);
    judge_exact(c);
    c.mc_pass = c.mc_pass && cm.lower_bound <= cm.exact;
  } else if (p.kind == "tube_measure") {
    check_keys(p, {"d", "r"}, spec);
    const int d = int_param(p, "d", spec);
    const double r = param(p, "r", spec);
    c.value = circle_tube_measure(d, r).exact;
    c.mc = mc_tube_measure(d, r, n, seed);
    judge_exact(c);
  } else if (p.kind == "beta_tail") {
    check_keys(p, {"alpha", "beta", "eps"}, spec);
    const double a = param(p, "alpha", spec), b = param(p, "beta", spec), eps = param(p, "eps", spec);
    const BetaTail bt = beta_tail(a, b, eps);
    c.lower = bt.lower;
    c.upper = bt.upper;
    c.mc = mc_beta_tail(a, b, eps, n, seed);
    if (bt.exact) {
      c.value = *bt.exact;
      judge_exact(c);
      const double slack = 1e-12 * *bt.exact;  // bounds go through exp/log
      c.mc_pass = c.mc_pass && bt.lower <= *bt.exact + slack && *bt.exact <= bt.upper + slack;
    } else {
      c.value = bt.lower;
      judge_bounds(c);
    }
  } else {
    throw ParameterError("unknown oracle check '" + p.kind + "' (known: cap_measure, tube_measure, beta_tail)");
  }
  if (c.expect) c.expect_pass = std::abs(c.value - *c.expect) <= 1e-10;
  c.pass = c.mc_pass && c.expect_pass.value_or(true);
  return c;
}

std::vector<std::string> default_oracle_suite() {
  return {
      "cap_measure d=3 r=0.5 expect 0.0625",
      "cap_measure d=4 r=0.3",
      "cap_measure d=4 r=1.3",
      "cap_measure d=5 r=0.5",
      "cap_measure d=6 r=0.3",
      "cap_measure d=6 r=0.9",
      "cap_measure d=7 r=0.8",
      "cap_measure d=8 r=1",
      "cap_measure d=9 r=1.2",
      "cap_measure d=10 r=0.7",
      "cap_measure d=10 r=1",
      "tube_measure d=4 r=0.5",
      "tube_measure d=4 r=0.9",
      "tube_measure d=5 r=0.3",
      "tube_measure d=5 r=0.7",
      "tube_measure d=6 r=0.6",
      "tube_measure d=6 r=0.95",
      "tube_measure d=7 r=0.8",
      "tube_measure d=8 r=0.5",
      "tube_measure d=9 r=0.9",
      "tube_measure d=10 r=0.7",
      "beta_tail alpha=1 beta=1 eps=0.3 expect 0.3",
      "beta_tail alpha=1 beta=2 eps=0.5 expect 0.25",
      "beta_tail alpha=1 beta=1.5 eps=0.2",
      "beta_tail alpha=1 beta=4 eps=0.4",
      "beta_tail alpha=0.5 beta=1.5 eps=0.2",
      "beta_tail alpha=0.5 beta=1.5 eps=0.6",
      "beta_tail alpha=0.5 beta=2 eps=0.3",
      "beta_tail alpha=0.5 beta=2.5 eps=0.5",
      "beta_tail alpha=0.5 beta=3 eps=0.4",
      "beta_tail alpha=0.5 beta=3.5 eps=0.7",
      "beta_tail alpha=0.5 beta=4 eps=0.5",
      "beta_tail alpha=0.5 beta=4.5 eps=0.8",
      "beta_tail alpha=0.8 beta=2 eps=0.25",
  };
}

nlohmann::json to_json(const OracleCheck& c) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j = {{"check", c.spec},
                      {"kind", c.kind},
                      {"value", c.value},
                      {"lower", opt(c.lower)},
                      {"upper", opt(c.upper)},
                      {"mc_mean", c.mc.mean},
                      {"mc_stderr", c.mc.std_error},
                      {"mc_samples", c.mc.n},
                      {"mc_seed", c.mc.seed},
                      {"z", std::isfinite(c.z) ? nlohmann::json(c.z) : nlohmann::json(nullptr)},
                      {"mc_pass", c.mc_pass},
                      {"expect", opt(c.expect)},
                      {"pass", c.pass}};
  j["expect_pass"] = c.expect_pass ? nlohmann::json(*c.expect_pass) : nlohmann::json(nullptr);
  return j;
}

std::string describe(const OracleCheck& c) {
  char buf[512];
  std::string s = (c.pass ? "PASS  " : "FAIL  ") + c.spec + "\n";
  if (c.upper) {
    std::snprintf(buf, sizeof buf, "      closed form %.10g  bounds [%.10g, %.10g]\n", c.value, *c.lower, *c.upper);
  } else if (c.lower) {
    std::snprintf(buf, sizeof buf, "      closed form %.10g  lower bound %.10g\n", c.value, *c.lower);
  } else {
    std::snprintf(buf, sizeof buf, "      closed form %.10g\n", c.value);
  }
  s += buf;
  std::snprintf(buf, sizeof buf, "      monte carlo %.10g +- %.3g (n=%lld, seed=%llu)  z=%.2f  %s\n", c.mc.mean,
                c.mc.std_error, static_cast<long long>(c.mc.n), static_cast<unsigned long long>(c.mc.seed), c.z,
                c.mc_pass ? "within 3 SE" : "outside 3 SE");
  s += buf;
  if (c.expect) {
    std::snprintf(buf, sizeof buf, "      expected %.10g  %s\n", *c.expect,
                  *c.expect_pass ? "matches" : "does not match the closed form");
    s += buf;
  }
  return s;
}

}  // namespace sparsecode
