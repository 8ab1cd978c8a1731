#include <gtest/gtest.h>

#include "sparsecode/measures.hpp"
#include "sparsecode/oracle.hpp"

using namespace sparsecode;

TEST(Oracle, CapCheckPasses) {
  const OracleCheck c = run_oracle_check("cap_measure d=6 r=0.3", 200000, 1);
  EXPECT_TRUE(c.pass) << describe(c);
  EXPECT_EQ(c.kind, "cap_measure");
  EXPECT_EQ(c.mc.n, 200000);
}

TEST(Oracle, TubeCheckPasses) {
  const OracleCheck c = run_oracle_check("tube_measure d=5 r=0.4", 200000, 2);
  EXPECT_TRUE(c.pass) << describe(c);
}

TEST(Oracle, BetaTailBoundsAndExpect) {
  const OracleCheck a = run_oracle_check("beta_tail alpha=0.5 beta=2.5 eps=0.2", 200000, 3);
  EXPECT_TRUE(a.pass) << describe(a);
  ASSERT_TRUE(a.lower && a.upper);
  EXPECT_LE(*a.lower, *a.upper);
  const OracleCheck b = run_oracle_check("beta_tail alpha=1 beta=2 eps=0.5 expect 0.25", 200000, 4);
  EXPECT_TRUE(b.pass) << describe(b);
  ASSERT_TRUE(b.expect_pass);
  EXPECT_TRUE(*b.expect_pass);
}

TEST(Oracle, ExpectMismatchFails) {
  const OracleCheck c = run_oracle_check("tube_measure d=4 r=0.5 expect 0.1171875", 200000, 5);
  EXPECT_TRUE(c.mc_pass) << describe(c);
  ASSERT_TRUE(c.expect_pass);
  EXPECT_FALSE(*c.expect_pass);
  EXPECT_FALSE(c.pass);
  EXPECT_DOUBLE_EQ(c.value, 0.234375);
}

TEST(Oracle, MalformedSpecsThrow) {
  EXPECT_THROW(run_oracle_check("volume d=3", 1000, 1), ParameterError);
  EXPECT_THROW(run_oracle_check("cap_measure d=6", 1000, 1), ParameterError);
  EXPECT_THROW(run_oracle_check("cap_measure d=6 r=abc", 1000, 1), ParameterError);
}

TEST(Oracle, DefaultSuiteCoverage) {
  int cap = 0, tube = 0, beta = 0;
  for (const auto& s : default_oracle_suite()) {
    cap += s.rfind("cap_measure", 0) == 0;
    tube += s.rfind("tube_measure", 0) == 0;
    beta += s.rfind("beta_tail", 0) == 0;
  }
  EXPECT_GE(cap, 10);
  EXPECT_GE(tube, 10);
  EXPECT_GE(beta, 10);
}

TEST(Oracle, EstimatesAreSeeded) {
  const McEstimate a = mc_cap_measure(5, 0.7, 100000, 11), b = mc_cap_measure(5, 0.7, 100000, 11);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.seed, 11u);
  EXPECT_NE(a.mean, mc_cap_measure(5, 0.7, 100000, 12).mean);
}
