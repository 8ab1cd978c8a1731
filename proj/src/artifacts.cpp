#include "sparsecode/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sparsecode {

using nlohmann::json;

bool PlanResult::any_invalid() const {
  for (const auto& s : sweeps)
    if (!s.all_valid()) return true;
  return false;
}

namespace {

template <typename Result>
const Result* find_label(const std::vector<Result>& v, const std::string& label) {
  for (const auto& r : v)
    if (r.label == label) return &r;
  return nullptr;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json seeds_json(const JobSeeds& s) {
  return {{"job", s.job},           {"expansion", s.expansion}, {"calibration", s.calibration},
          {"training", s.training}, {"test", s.test},           {"probe", s.probe}};
}

}  // namespace

PlanResult run_plan(const ExperimentPlan& plan, int threads) {
  plan.validate();
  PlanResult out;
  for (const auto& s : plan.sweeps) out.sweeps.push_back(run_rate_sweep(s, threads));
  for (const auto& u : plan.usage) out.usage.push_back(usage_scaling(u, threads));
  if (plan.compare) {
    ComparisonResult c;
    c.shallow = plan.compare->shallow;
    c.steep = plan.compare->steep;
    c.min_gap = plan.compare->min_gap;
    if (const auto* a = find_label(out.sweeps, c.shallow)) c.shallow_slope = a->fitted_slope();
    if (const auto* b = find_label(out.sweeps, c.steep)) c.steep_slope = b->fitted_slope();
    if (c.shallow_slope && c.steep_slope) c.gap = *c.shallow_slope - *c.steep_slope;
    c.pass = c.gap && *c.gap >= c.min_gap;
    out.compare = c;
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string scaling_csv(const ScalingResult& r) {
  std::ostringstream os;
  os << "m,k,sup_err,mean_err,non_covered_fraction,used_unit_count,max_cell_diam,valid\n";
  for (const GridPoint& p : r.grid) {
    os << p.m << ',' << p.k << ',' << format_double(p.sup_err) << ',' << format_double(p.mean_err) << ','
       << format_double(p.non_covered_fraction) << ',' << format_double(p.used_unit_count) << ','
       << format_double(p.max_cell_diam) << ',' << (p.valid ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string trials_csv(const ScalingResult& r) {
  std::ostringstream os;
  os << "m,k,trial,job_seed,n_train,n_cal,good_units,zero_count_units,sup_err,mean_err,non_covered_fraction,"
        "used_unit_count,max_cell_diam\n";
  for (const TrialRecord& t : r.trials) {
    os << t.m << ',' << t.k << ',' << t.trial << ',' << t.seeds.job << ',' << t.n_train << ',' << t.n_cal << ','
       << t.good_units << ',' << t.zero_count_units << ',' << format_double(t.error.sup_abs_err) << ','
       << format_double(t.error.mean_abs_err) << ',' << format_double(t.error.non_covered_fraction) << ','
       << t.used_unit_count << ',' << format_double(t.error.max_cell_diam) << '\n';
  }
  return os.str();
}

std::string usage_csv(const UsageResult& r) {
  std::ostringstream os;
  os << "m,k,ever_used_count,ever_used_fraction,min_fire_count\n";
  for (const UsagePoint& p : r.grid) {
    os << p.m << ',' << p.k << ',' << format_double(p.ever_used_count) << ',' << format_double(p.ever_used_fraction)
       << ',' << p.min_fire_count << '\n';
  }
  return os.str();
}

json to_json(const SlopeFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"stderr", optional_number(f.std_error)},
          {"n_points", f.n_points}};
}

json to_json(const ScalingResult& r) {
  json j;
  j["label"] = r.label;
  j["master_seed"] = r.master_seed;
  j["fitted_slope"] = optional_number(r.fitted_slope());
  j["slope_stderr"] = r.fit ? optional_number(r.fit->std_error) : json(nullptr);
  j["fit"] = r.fit ? to_json(*r.fit) : json(nullptr);
  j["fit_note"] = r.fit_note;
  j["unfiltered_fit"] = r.unfiltered_fit ? to_json(*r.unfiltered_fit) : json(nullptr);
  j["all_valid"] = r.all_valid();
  j["inversions"] = r.inversions;
  j["monotone_flag"] = r.monotone_flag;
  j["trials"] = json::array();
  for (const TrialRecord& t : r.trials)
    j["trials"].push_back({{"m", t.m}, {"k", t.k}, {"trial", t.trial}, {"seeds", seeds_json(t.seeds)}});
  return j;
}

json to_json(const UsageResult& r) {
  json j;
  j["label"] = r.label;
  j["master_seed"] = r.master_seed;
  j["fitted_slope"] = r.fit ? json(r.fit->slope) : json(nullptr);
  j["fit"] = r.fit ? to_json(*r.fit) : json(nullptr);
  j["fit_note"] = r.fit_note;
  j["every_unit_fired"] = r.every_unit_fired();
  j["trials"] = json::array();
  for (const UsageTrial& t : r.trials)
    j["trials"].push_back({{"m", t.m}, {"k", t.k}, {"trial", t.trial}, {"seeds", seeds_json(t.seeds)}});
  return j;
}

json summary_json(const ExperimentPlan& plan, const PlanResult& result) {
  json j;
  j["schema_version"] = kArtifactSchemaVersion;
  j["name"] = plan.name;
  j["config"] = to_json(plan);
  j["sweeps"] = json::array();
  for (const auto& s : result.sweeps) j["sweeps"].push_back(to_json(s));
  j["usage"] = json::array();
  for (const auto& u : result.usage) j["usage"].push_back(to_json(u));
  if (result.compare) {
    const auto& c = *result.compare;
    j["compare"] = {{"shallow", c.shallow},
                    {"steep", c.steep},
                    {"shallow_slope", optional_number(c.shallow_slope)},
                    {"steep_slope", optional_number(c.steep_slope)},
                    {"gap", optional_number(c.gap)},
                    {"min_gap", c.min_gap},
                    {"pass", c.pass}};
  }
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

std::vector<std::filesystem::path> write_artifacts(const std::filesystem::path& dir, const ExperimentPlan& plan,
                                                   const PlanResult& result) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  auto emit = [&](const std::string& name, const std::string& text) {
    paths.push_back(dir / name);
    write_text_file(paths.back(), text);
  };
  for (const auto& s : result.sweeps) {
    emit(s.label + ".csv", scaling_csv(s));
    emit(s.label + "_trials.csv", trials_csv(s));
  }
  for (const auto& u : result.usage) emit(u.label + ".csv", usage_csv(u));
  emit("summary.json", summary_json(plan, result).dump(2) + "\n");
  return paths;
}

}  // namespace sparsecode
