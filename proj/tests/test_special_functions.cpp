#include <gtest/gtest.h>

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <random>

#include "sparsecode/special_functions.hpp"

using namespace sparsecode;

TEST(IncompleteBeta, EndpointsAndSymmetry) {
  EXPECT_EQ(regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0);
  EXPECT_EQ(regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0);
  for (double x : {0.1, 0.37, 0.5, 0.81}) {
    EXPECT_NEAR(regularized_incomplete_beta(1.7, 0.6, x), 1.0 - regularized_incomplete_beta(0.6, 1.7, 1.0 - x), 1e-13);
  }
}

TEST(IncompleteBeta, ClosedFormsForIntegerParameters) {
  // I_x(1, b) = 1 - (1 - x)^b and I_x(a, 1) = x^a.
  for (double x : {0.05, 0.3, 0.77}) {
    EXPECT_NEAR(regularized_incomplete_beta(1.0, 4.0, x), 1.0 - std::pow(1.0 - x, 4.0), 1e-14);
    EXPECT_NEAR(regularized_incomplete_beta(2.5, 1.0, x), std::pow(x, 2.5), 1e-14);
  }
}

TEST(IncompleteBeta, AgreesWithBoostOnRandomGrid) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ab(0.2, 12.0), xs(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = ab(rng), b = ab(rng), x = xs(rng);
    const double ref = boost::math::ibeta(a, b, x);
    EXPECT_NEAR(regularized_incomplete_beta(a, b, x), ref, 1e-10 * std::max(ref, 1e-6)) << a << " " << b << " " << x;
  }
}

TEST(IncompleteBeta, UpperTailMatchesBoostComplement) {
  for (double a : {0.5, 1.0, 3.0})
    for (double b : {1.5, 4.5, 9.0})
      for (double x : {0.5, 0.9, 0.999, 0.999999}) {
        const double ref = boost::math::ibetac(a, b, x);
        EXPECT_NEAR(beta_upper_tail(a, b, x), ref, 1e-10 * ref) << a << " " << b << " " << x;
      }
}

TEST(LogBeta, MatchesLgamma) {
  EXPECT_NEAR(log_beta(2.0, 3.0), std::log(1.0 / 12.0), 1e-14);
  EXPECT_NEAR(log_beta(0.5, 0.5), std::log(M_PI), 1e-14);
}
