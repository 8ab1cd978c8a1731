#include "sparsecode/special_functions.hpp"

#include <cmath>
#include <limits>

#include "sparsecode/errors.hpp"

namespace sparsecode {
namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEpsilon = 1e-15;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a, b), converging for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEpsilon) return h;
  }
  throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

// x^a (1-x)^b / (a B(a, b)) * cf, only valid on the convergent side.
double lower_series(double a, double b, double x) {
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
}

void check_args(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("incomplete beta: a and b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("incomplete beta: x must lie in [0, 1]");
}

}  // namespace

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double regularized_incomplete_beta(double a, double b, double x) {
  check_args(a, b, x);
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return lower_series(a, b, x);
  return 1.0 - lower_series(b, a, 1.0 - x);
}

double beta_upper_tail(double a, double b, double x) {
  check_args(a, b, x);
  if (x == 0.0) return 1.0;
  if (x == 1.0) return 0.0;
  // Pr(Z >= x) = I_{1-x}(b, a).
  const double y = 1.0 - x;
  if (y < (b + 1.0) / (a + b + 2.0)) return lower_series(b, a, y);
  return 1.0 - lower_series(a, b, x);
}

}  // namespace sparsecode
