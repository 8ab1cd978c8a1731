#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "sparsecode/experiment.hpp"

using namespace sparsecode;
using nlohmann::json;

namespace {

std::string config_path(const std::string& name) { return std::string(SPARSECODE_CONFIG_DIR) + "/" + name + ".json"; }

json minimal_plan() {
  return json::parse(R"({
    "name": "t",
    "master_seed": 4,
    "sweeps": [{
      "label": "a",
      "manifold": {"kind": "circle", "dim": 4},
      "expansion": {"kind": "gaussian", "sigma": 0.5},
      "scheme": "threshold",
      "goodness": "reach_band",
      "target": {"kind": "triangular", "lambda": 2},
      "m_grid": [64, 128, 256],
      "k_rule": {"kind": "fixed", "k": 8},
      "n_train": 5000,
      "n_cal": {"per_cell": 20},
      "n_test": 1000,
      "trials": 2
    }]
  })");
}

std::string error_field(const json& j) {
  try {
    parse_plan(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

}  // namespace

TEST(KRule, Resolution) {
  EXPECT_EQ(KRule::fixed(5).resolve(100, 3, 2), 5);
  EXPECT_EQ(KRule::log(1, 2, true).resolve(1024, 3, 2), 30);
  EXPECT_EQ(KRule::log(3, std::exp(1.0), false).resolve(256, 8, 1), 17);  // 3 ln 256 = 16.64
  EXPECT_EQ(KRule::half_intrinsic().resolve(100, 8, 1), 1);
  EXPECT_EQ(KRule::half_intrinsic().resolve(100, 8, 4), 2);
  EXPECT_EQ(KRule::half_intrinsic().resolve(100, 8, 5), 3);
}

TEST(SizeRule, Resolution) {
  EXPECT_EQ(SizeRule::count(123).resolve(64, 4), 123);
  EXPECT_EQ(SizeRule::per_cell_of(200).resolve(256, 24), 2134);  // ceil(51200 / 24)
}

TEST(Plan, BundledConfigsParse) {
  for (const char* name : {"thm33_sphere_d3", "thm34_vs_thm45_circle_d8", "thm51_attuned_circle", "usage_circle_d5"}) {
    SCOPED_TRACE(name);
    const ExperimentPlan p = load_plan(config_path(name));
    EXPECT_EQ(p.name, name);
    EXPECT_NO_THROW(p.validate());
  }
  const ExperimentPlan c = load_plan(config_path("thm34_vs_thm45_circle_d8"));
  ASSERT_EQ(c.sweeps.size(), 2u);
  ASSERT_TRUE(c.compare);
  EXPECT_EQ(c.sweeps[1].scheme, Scheme::Threshold);
  EXPECT_EQ(c.sweeps[1].goodness.mode(), GoodnessMode::ReachBand);
  EXPECT_DOUBLE_EQ(c.sweeps[1].dist.sigma(), 1.0 / std::sqrt(8.0));
  const ExperimentPlan s = load_plan(config_path("thm33_sphere_d3"));
  ASSERT_EQ(s.sweeps.size(), 1u);
  EXPECT_EQ(s.sweeps[0].k_for(256), 24);
  EXPECT_EQ(s.sweeps[0].master_seed, s.master_seed);
}

TEST(Plan, JsonRoundTrip) {
  for (const char* name : {"thm33_sphere_d3", "thm34_vs_thm45_circle_d8", "thm51_attuned_circle", "usage_circle_d5"}) {
    SCOPED_TRACE(name);
    const json once = to_json(load_plan(config_path(name)));
    EXPECT_EQ(to_json(parse_plan(once)), once);
  }
  const json once = to_json(parse_plan(minimal_plan()));
  EXPECT_EQ(to_json(parse_plan(once)), once);
}

TEST(Plan, ErrorsNameTheField) {
  json j = minimal_plan();
  j["sweeps"][0]["k_rule"]["k"] = 100;
  EXPECT_EQ(error_field(j), "a.k_rule");

  j = minimal_plan();
  j.erase("master_seed");
  EXPECT_EQ(error_field(j), "master_seed");

  j = minimal_plan();
  j["sweeps"][0]["manifold"]["kind"] = "torus";
  EXPECT_NE(error_field(j).find("manifold.kind"), std::string::npos);

  j = minimal_plan();
  j["sweeps"][0]["m_grid"] = {128, 64, 256};
  EXPECT_NE(error_field(j).find("m_grid"), std::string::npos);

  j = minimal_plan();
  j["sweeps"][0]["n_test"] = 999;
  EXPECT_NE(error_field(j).find("n_test"), std::string::npos);

  j = minimal_plan();
  j["sweeps"][0]["n_cal"] = 10;
  EXPECT_NE(error_field(j).find("n_cal"), std::string::npos);

  j = minimal_plan();
  j["sweeps"][0]["manifold"] = {{"kind", "full_sphere"}, {"dim", 4}};
  EXPECT_NE(error_field(j).find("target"), std::string::npos);

  j = minimal_plan();
  j["compare"] = {{"shallow", "a"}, {"steep", "missing"}};
  EXPECT_NE(error_field(j).find("compare"), std::string::npos);

  EXPECT_EQ(error_field(minimal_plan()), "<none>");
}

TEST(Plan, MissingFileIsConfigError) { EXPECT_THROW(load_plan("/nonexistent/plan.json"), ConfigError); }
