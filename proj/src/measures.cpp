#include "sparsecode/measures.hpp"

#include <cmath>

#include "sparsecode/errors.hpp"
#include "sparsecode/special_functions.hpp"

namespace sparsecode {
namespace {

double cap_epsilon(double r) { return r * r * (1.0 - r * r / 4.0); }

}  // namespace

CapMeasure cap_measure_exact(int d, double r) {
  if (d < 2) throw ParameterError("cap_measure_exact: d must be >= 2");
  if (!(r > 0.0 && r < std::sqrt(2.0))) throw ParameterError("cap_measure_exact: r must lie in (0, sqrt 2)");
  const double half_d = 0.5 * (d - 1);
  // Pr(theta_1^2 >= 1 - eps) = I_eps((d-1)/2, 1/2).
  // 1 - eps = (1 - r^2/2)^2; the square form stays in [0, 1] near r = sqrt(2).
  const double exact = 0.5 * beta_upper_tail(0.5, half_d, (1.0 - r * r / 2.0) * (1.0 - r * r / 2.0));
  const double lower = std::pow(r, d - 1) * std::pow(1.0 - r * r / 4.0, half_d) / (3.0 * std::sqrt(double(d)));
  return {exact, lower};
}

TubeMeasure circle_tube_measure(int d, double r) {
  if (d <= 3) throw ParameterError("circle_tube_measure: d must be > 3");
  if (!(r > 0.0 && r < 1.0)) throw ParameterError("circle_tube_measure: r must lie in (0, 1)");
  const double exact = std::pow(cap_epsilon(r), 0.5 * (d - 2));
  return {exact, 0.5 * exact};
}

BetaTail beta_tail(double alpha, double beta, double eps) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("beta_tail: alpha must lie in (0, 1]");
  if (!(beta >= 1.0) || !std::isfinite(beta)) throw ParameterError("beta_tail: beta must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("beta_tail: eps must lie in (0, 1)");
  const double lower = std::exp(beta * std::log(eps) - std::log(beta) - log_beta(alpha, beta));
  const double upper = lower * std::pow(1.0 - eps, alpha - 1.0);
  BetaTail out{lower, upper, std::nullopt};
  if (alpha == 1.0) out.exact = std::pow(eps, beta);
  return out;
}

}  // namespace sparsecode
