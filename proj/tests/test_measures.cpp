#include <gtest/gtest.h>

#include <cmath>

#include "sparsecode/errors.hpp"
#include "sparsecode/measures.hpp"
#include "sparsecode/oracle.hpp"

using namespace sparsecode;

TEST(CapMeasure, TwoSphereClosedForm) {
  // On S^2 the cap of chordal radius r has area fraction r^2 / 4.
  EXPECT_NEAR(cap_measure_exact(3, 0.5).exact, 0.0625, 1e-12);
  for (double r : {0.1, 0.7, 1.3}) EXPECT_NEAR(cap_measure_exact(3, r).exact, r * r / 4.0, 1e-12);
}

TEST(CapMeasure, HemisphereLimit) {
  for (int d : {2, 3, 5, 10}) EXPECT_NEAR(cap_measure_exact(d, std::sqrt(2.0) - 1e-9).exact, 0.5, 1e-6);
}

TEST(CapMeasure, LowerBoundBelowExactAndMonotone) {
  for (int d = 2; d <= 12; ++d) {
    double prev = 0.0;
    for (double r = 0.05; r < 1.41; r += 0.05) {
      const CapMeasure c = cap_measure_exact(d, r);
      EXPECT_LE(c.lower_bound, c.exact) << d << " " << r;
      EXPECT_GT(c.exact, prev) << d << " " << r;
      prev = c.exact;
    }
  }
}

TEST(CapMeasure, RejectsBadRadius) {
  EXPECT_THROW(cap_measure_exact(3, 0.0), ParameterError);
  EXPECT_THROW(cap_measure_exact(3, 1.5), ParameterError);
  EXPECT_THROW(cap_measure_exact(1, 0.5), ParameterError);
}

TEST(CapMeasure, MonteCarloAgreementD6) {
  const McEstimate mc = mc_cap_measure(6, 0.3, 1000000, 606);
  EXPECT_NEAR(mc.mean, cap_measure_exact(6, 0.3).exact, 3.0 * mc.std_error + 1e-7);
}

TEST(TubeMeasure, ClosedFormValues) {
  // eps = r^2 (1 - r^2 / 4); at d = 4 the mass is eps itself.
  EXPECT_DOUBLE_EQ(circle_tube_measure(4, 0.5).exact, 0.234375);
  EXPECT_DOUBLE_EQ(circle_tube_measure(4, 0.5).stated_form, 0.1171875);
  EXPECT_NEAR(circle_tube_measure(4, 1.0 - 1e-12).exact, 0.75, 1e-9);
}

TEST(TubeMeasure, MonteCarloAgreement) {
  for (auto [d, r] : {std::pair{4, 0.5}, {6, 0.7}, {9, 0.9}}) {
    const McEstimate mc = mc_tube_measure(d, r, 1000000, 4000 + d);
    EXPECT_NEAR(mc.mean, circle_tube_measure(d, r).exact, 3.0 * mc.std_error) << d << " " << r;
  }
}

TEST(TubeMeasure, RejectsLowDimension) {
  EXPECT_THROW(circle_tube_measure(3, 0.5), ParameterError);
  EXPECT_THROW(circle_tube_measure(5, 1.0), ParameterError);
}

TEST(BetaTail, ExactCases) {
  EXPECT_DOUBLE_EQ(*beta_tail(1.0, 1.0, 0.3).exact, 0.3);
  EXPECT_DOUBLE_EQ(*beta_tail(1.0, 2.0, 0.5).exact, 0.25);
  EXPECT_FALSE(beta_tail(0.5, 2.0, 0.5).exact.has_value());
}

TEST(BetaTail, SandwichAndRange) {
  for (double b : {1.0, 1.5, 3.0, 7.0})
    for (double e : {0.01, 0.2, 0.6, 0.95}) {
      const BetaTail t = beta_tail(1.0, b, e);
      EXPECT_NEAR(t.lower, *t.exact, 1e-12 * *t.exact);
      EXPECT_NEAR(t.upper, *t.exact, 1e-12 * *t.exact);
      for (double a : {0.3, 0.5, 0.9}) {
        const BetaTail u = beta_tail(a, b, e);
        EXPECT_GT(u.lower, 0.0);
        EXPECT_LE(u.lower, u.upper);
      }
    }
}

TEST(BetaTail, BoundsContainMonteCarlo) {
  const BetaTail t = beta_tail(0.5, 1.5, 0.2);
  const McEstimate mc = mc_beta_tail(0.5, 1.5, 0.2, 1000000, 77);
  EXPECT_GE(mc.mean + 3.0 * mc.std_error, t.lower);
  EXPECT_LE(mc.mean - 3.0 * mc.std_error, t.upper);
}

TEST(BetaTail, RejectsOutOfRange) {
  EXPECT_THROW(beta_tail(1.5, 2.0, 0.5), ParameterError);
  EXPECT_THROW(beta_tail(0.5, 0.5, 0.5), ParameterError);
  EXPECT_THROW(beta_tail(0.5, 2.0, 1.0), ParameterError);
}
