// sparsecode: command-line front end for the expand-and-sparsify library.
//
//   sparsecode sweep --config configs/thm33_sphere_d3.json --out runs/thm33
//   sparsecode usage --config configs/usage_circle_d5.json --out runs/usage
//   sparsecode calibrate --config C --out DIR [--sweep LABEL] [--m M]
//   sparsecode learn --config C --out DIR [--sweep LABEL] [--m M] [--encoder FILE]
//   sparsecode encode --encoder FILE --input X.csv --out DIR
//   sparsecode oracle "cap_measure d=6 r=0.3" ... | --all

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sparsecode/artifacts.hpp"
#include "sparsecode/experiment.hpp"
#include "sparsecode/metrics.hpp"
#include "sparsecode/oracle.hpp"
#include "sparsecode/persistence.hpp"

namespace fs = std::filesystem;
using namespace sparsecode;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<int> threads;
  bool strict = false;
};

// --seed replaces the plan seed; sweeps that carried their own seed get one
// derived from it so they stay distinct.
ExperimentPlan load_with_overrides(const CommonOptions& o) {
  if (o.config.empty()) throw ConfigError("--config", "a config file is required");
  ExperimentPlan plan = load_plan(o.config);
  if (o.seed) {
    const std::uint64_t old = plan.master_seed;
    plan.master_seed = *o.seed;
    std::uint64_t i = 0;
    for (auto& s : plan.sweeps) {
      ++i;
      s.master_seed = s.master_seed == old ? *o.seed : derive_seed(*o.seed, {i});
    }
    for (auto& u : plan.usage) {
      ++i;
      u.master_seed = u.master_seed == old ? *o.seed : derive_seed(*o.seed, {i});
    }
  }
  return plan;
}

// The pieces of a sweep needed to build one encoder.
struct EncoderSetup {
  ManifoldSpec manifold;
  DistributionSpec dist;
  Scheme scheme;
  Index m;
  Index k;
  SizeRule n_cal;
  std::uint64_t master_seed;
  const ExperimentConfig* rate = nullptr;
};

EncoderSetup select_setup(const ExperimentPlan& plan, const std::string& label, std::optional<Index> m_opt) {
  auto pick_m = [&](const std::vector<Index>& grid) { return m_opt.value_or(grid.front()); };
  for (const auto& s : plan.sweeps) {
    if (!label.empty() && s.label != label) continue;
    const Index m = pick_m(s.m_grid);
    return {s.manifold, s.dist, s.scheme, m, s.k_for(m), s.n_cal, s.master_seed, &s};
  }
  for (const auto& u : plan.usage) {
    if (!label.empty() && u.label != label) continue;
    const Index m = pick_m(u.m_grid);
    return {u.manifold, u.dist, u.scheme, m, u.k_for(m), u.n_cal, u.master_seed, nullptr};
  }
  throw ConfigError("--sweep", label.empty() ? "config has no sweeps" : "no sweep labelled '" + label + "'");
}

void check_k(const EncoderSetup& e) {
  if (e.m < 1) throw ConfigError("--m", "must be >= 1");
  if (e.k < 1 || e.k > e.m)
    throw ConfigError("k_rule", "k = " + std::to_string(e.k) + " is outside [1, m] for m = " + std::to_string(e.m));
}

struct BuiltEncoder {
  std::shared_ptr<const ExpansionMatrixd> theta;
  Sparsifierd sparsifier;
  JobSeeds seeds;
  Index n_cal;
};

BuiltEncoder build_encoder(const EncoderSetup& e) {
  check_k(e);
  const JobSeeds seeds = job_seeds(e.master_seed, e.m, 0);
  auto theta = std::make_shared<const ExpansionMatrixd>(build_expansion<double>(e.dist, e.m, seeds.expansion));
  const Index n_cal = e.scheme == Scheme::Threshold ? e.n_cal.resolve(e.m, e.k) : 0;
  Sparsifierd s = make_sparsifier(e.scheme, *theta, e.manifold, e.k, n_cal, seeds.calibration);
  return {theta, s, seeds, n_cal};
}

nlohmann::json encoder_json(const ExpansionMatrixd& theta, const Sparsifierd& s, Index n_cal) {
  nlohmann::json j = {{"m", theta.m()},
                      {"d", theta.dim()},
                      {"k", s.k()},
                      {"scheme", to_string(s.scheme())},
                      {"expansion", theta.distribution().name()},
                      {"expansion_seed", theta.seed()},
                      {"n_cal", n_cal}};
  if (s.thresholds()) {
    const auto& tau = s.thresholds()->tau();
    j["tau_min"] = tau.minCoeff();
    j["tau_max"] = tau.maxCoeff();
    j["tau_mean"] = tau.mean();
  }
  return j;
}

int cmd_sweep(const CommonOptions& o, bool usage_only) {
  ExperimentPlan plan = load_with_overrides(o);
  if (usage_only) {
    plan.sweeps.clear();
    plan.compare.reset();
    if (plan.usage.empty()) throw ConfigError("usage", "config defines no usage sweeps");
  }
  const int threads = resolve_threads(o.threads);
  const PlanResult result = run_plan(plan, threads);
  const auto paths = write_artifacts(o.out, plan, result);

  for (const auto& s : result.sweeps) {
    std::printf("%s: ", s.label.c_str());
    if (s.fit)
      std::printf("slope %.4f (stderr %.4f, %d points)", s.fit->slope, s.fit->std_error.value_or(0.0),
                  s.fit->n_points);
    else
      std::printf("slope none (%s)", s.fit_note.c_str());
    if (!s.all_valid()) std::printf("  [invalid grid points]");
    if (s.monotone_flag) std::printf("  [%d inversions]", s.inversions);
    std::printf("\n");
  }
  for (const auto& u : result.usage) {
    std::printf("%s: ", u.label.c_str());
    if (u.fit)
      std::printf("usage slope %.4f", u.fit->slope);
    else
      std::printf("usage slope none");
    std::printf("  every unit fired: %s\n", u.every_unit_fired() ? "yes" : "no");
  }
  if (result.compare) {
    const auto& c = *result.compare;
    if (c.gap)
      std::printf("gap %s - %s = %.4f (min %.2f): %s\n", c.shallow.c_str(), c.steep.c_str(), *c.gap, c.min_gap,
                  c.pass ? "pass" : "fail");
    else
      std::printf("gap %s - %s undefined\n", c.shallow.c_str(), c.steep.c_str());
  }
  for (const auto& p : paths) std::printf("wrote %s\n", p.string().c_str());
  if (o.strict && result.any_invalid()) {
    std::fprintf(stderr, "strict: at least one grid point exceeds the non-coverage limit\n");
    return 1;
  }
  return 0;
}

int cmd_calibrate(const CommonOptions& o, const std::string& label, std::optional<Index> m) {
  const ExperimentPlan plan = load_with_overrides(o);
  const EncoderSetup setup = select_setup(plan, label, m);
  const BuiltEncoder enc = build_encoder(setup);
  fs::create_directories(o.out);
  const fs::path bin = fs::path(o.out) / "encoder.easp";
  save_encoder(bin.string(), *enc.theta, enc.sparsifier, setup.manifold);
  nlohmann::json j = encoder_json(*enc.theta, enc.sparsifier, enc.n_cal);
  j["manifold"] = setup.manifold.name();
  j["job_seed"] = enc.seeds.job;
  j["calibration_seed"] = enc.seeds.calibration;
  write_text_file(fs::path(o.out) / "encoder.json", j.dump(2) + "\n");
  std::printf("wrote %s\n", bin.string().c_str());
  return 0;
}

int cmd_learn(const CommonOptions& o, const std::string& label, std::optional<Index> m, const std::string& encoder) {
  const ExperimentPlan plan = load_with_overrides(o);
  EncoderSetup setup = select_setup(plan, label, m);
  if (!setup.rate) throw ConfigError("--sweep", "learn needs a rate sweep (with target and sample sizes)");
  const ExperimentConfig& cfg = *setup.rate;
  std::shared_ptr<const ExpansionMatrixd> theta;
  std::optional<Sparsifierd> sparsifier;
  JobSeeds seeds = job_seeds(setup.master_seed, setup.m, 0);
  if (!encoder.empty()) {
    Container c = load_container(encoder);
    if (c.theta->dim() != setup.manifold.ambient_dim())
      throw ConfigError("--encoder", "encoder dimension differs from the config manifold");
    theta = c.theta;
    sparsifier = c.sparsifier;
    seeds = job_seeds(setup.master_seed, theta->m(), 0);
  } else {
    BuiltEncoder b = build_encoder(setup);
    theta = b.theta;
    sparsifier = b.sparsifier;
  }
  const Index n_train = cfg.n_train.resolve(theta->m(), sparsifier->k());
  const ApproximatorModel model =
      learn_weights(theta, *sparsifier, cfg.target, cfg.manifold, n_train, seeds.training, cfg.goodness);
  const ErrorReport err = sup_error(model, cfg.target, cfg.manifold, cfg.n_test, seeds.test);

  fs::create_directories(o.out);
  const fs::path bin = fs::path(o.out) / "model.easp";
  save_model(bin.string(), model, cfg.manifold);
  nlohmann::json j = encoder_json(*theta, *sparsifier, sparsifier->thresholds() ? sparsifier->thresholds()->calibration_sample_size() : 0);
  j["sweep"] = cfg.label;
  j["target"] = cfg.target.name();
  j["n_train"] = n_train;
  j["training_seed"] = seeds.training;
  j["test_seed"] = seeds.test;
  j["good_units"] = model.good_mask().count();
  j["zero_count_units"] = model.zero_count_units().size();
  j["used_unit_count"] = model.used_unit_count();
  j["sup_abs_err"] = err.sup_abs_err;
  j["mean_abs_err"] = err.mean_abs_err;
  j["non_covered_fraction"] = err.non_covered_fraction;
  j["n_test"] = err.n_test;
  j["max_cell_diam"] = err.max_cell_diam;
  write_text_file(fs::path(o.out) / "learn.json", j.dump(2) + "\n");
  std::printf("sup_abs_err %.6g  mean_abs_err %.6g  non_covered %.4f\n", err.sup_abs_err, err.mean_abs_err,
              err.non_covered_fraction);
  std::printf("wrote %s\n", bin.string().c_str());
  return 0;
}

// Parses one CSV row of exactly d numbers.
Eigen::VectorXd parse_row(const std::string& line, Index d, std::size_t line_no) {
  Eigen::VectorXd x(d);
  std::stringstream ss(line);
  std::string cell;
  Index c = 0;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
    if (used == 0 || used != cell.size() || !std::isfinite(v))
      throw FormatError("line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
    if (c >= d) throw FormatError("line " + std::to_string(line_no) + ": more than " + std::to_string(d) + " values");
    x[c++] = v;
  }
  if (c != d)
    throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(d) + " values, got " +
                      std::to_string(c));
  return x;
}

int cmd_encode(const CommonOptions& o, const std::string& encoder, const std::string& input) {
  const Container c = load_container(encoder);
  std::ifstream in(input);
  if (!in) throw FormatError("cannot open input '" + input + "'");
  std::ostringstream codes;
  std::string line;
  std::size_t line_no = 0;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const Eigen::VectorXd x = parse_row(line, c.theta->dim(), line_no);
    const SparseCode z = encode(*c.theta, c.sparsifier, x);
    for (std::size_t i = 0; i < z.active().size(); ++i) codes << (i ? "," : "") << z.active()[i];
    codes << '\n';
    ++rows;
  }
  fs::create_directories(o.out);
  const fs::path path = fs::path(o.out) / "codes.csv";
  write_text_file(path, codes.str());
  std::printf("encoded %lld rows -> %s\n", static_cast<long long>(rows), path.string().c_str());
  return 0;
}

int cmd_oracle(const CommonOptions& o, std::vector<std::string> checks, bool all, Index samples, bool write_report) {
  if (all) {
    const auto suite = default_oracle_suite();
    checks.insert(checks.end(), suite.begin(), suite.end());
  }
  if (checks.empty()) throw ParameterError("oracle: name at least one check or pass --all");
  const std::uint64_t seed = o.seed.value_or(1);
  nlohmann::json report = nlohmann::json::array();
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const OracleCheck c = run_oracle_check(checks[i], samples, derive_seed(seed, {i}));
    std::fputs(describe(c).c_str(), stdout);
    report.push_back(to_json(c));
    failed += c.pass ? 0 : 1;
  }
  std::printf("%zu checks, %d failed\n", checks.size(), failed);
  if (write_report) {
    fs::create_directories(o.out);
    write_text_file(fs::path(o.out) / "oracle.json", report.dump(2) + "\n");
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"expand-and-sparsify codes, cell-average approximators and rate experiments"};
  app.require_subcommand(1);
  CommonOptions o;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* cfg = sub->add_option("--config", o.config, "JSON experiment config");
    if (needs_config) cfg->required();
    sub->add_option("--seed", o.seed, "override the master seed");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--threads", o.threads, "worker threads (default: SPARSECODE_THREADS or all cores)");
  };

  auto* sweep = app.add_subcommand("sweep", "run every rate and usage sweep of a config");
  add_common(sweep, true);
  sweep->add_flag("--strict", o.strict, "exit 1 when any grid point is flagged invalid");

  auto* usage = app.add_subcommand("usage", "run only the usage sweeps of a config");
  add_common(usage, true);

  std::string label;
  std::optional<Index> m;
  auto* calibrate = app.add_subcommand("calibrate", "build Theta (and thresholds) for one sweep and save it");
  add_common(calibrate, true);
  calibrate->add_option("--sweep", label, "sweep label (default: first)");
  calibrate->add_option("--m", m, "expansion size (default: first grid value)");

  std::string encoder;
  auto* learn = app.add_subcommand("learn", "learn the readout for one sweep and save the model");
  add_common(learn, true);
  learn->add_option("--sweep", label, "sweep label (default: first)");
  learn->add_option("--m", m, "expansion size (default: first grid value)");
  learn->add_option("--encoder", encoder, "reuse a saved encoder instead of building one")->check(CLI::ExistingFile);

  std::string input;
  auto* enc = app.add_subcommand("encode", "encode CSV rows with a saved encoder");
  add_common(enc, false);
  enc->add_option("--encoder", encoder, "encoder or model container")->required()->check(CLI::ExistingFile);
  enc->add_option("--input", input, "CSV file, one d-dimensional vector per row")->required()->check(CLI::ExistingFile);

  std::vector<std::string> checks;
  bool all = false;
  Index samples = kDefaultOracleSamples;
  auto* oracle = app.add_subcommand("oracle", "compare closed-form measures with Monte Carlo");
  add_common(oracle, false);
  oracle->add_option("checks", checks, "checks such as \"cap_measure d=6 r=0.3\"");
  oracle->add_flag("--all", all, "run the default suite");
  oracle->add_option("--samples", samples, "Monte Carlo samples per check")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) return cmd_sweep(o, false);
    if (*usage) return cmd_sweep(o, true);
    if (*calibrate) return cmd_calibrate(o, label, m);
    if (*learn) return cmd_learn(o, label, m, encoder);
    if (*enc) return cmd_encode(o, encoder, input);
    if (*oracle) return cmd_oracle(o, checks, all, samples, oracle->get_option("--out")->count() > 0);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
