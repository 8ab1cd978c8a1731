#pragma once

// Closed-form masses of spherical caps and circle tubes under the uniform
// measure on S^{d-1}, and the Beta-tail bounds they are built from.

#include <optional>

namespace sparsecode {

struct CapMeasure {
  double exact;        // nu(B(x, r)) for any x on the sphere
  double lower_bound;  // (1/(3 sqrt d)) r^{d-1} (1 - r^2/4)^{(d-1)/2}
};

/// Mass of the Euclidean ball B(x, r) for x on S^{d-1}, 2 <= d, 0 < r < sqrt(2).
/// Computed as (1/2) Pr(theta_1^2 >= 1 - eps) with theta_1^2 ~ Beta(1/2, (d-1)/2)
/// and eps = r^2 (1 - r^2/4).
CapMeasure cap_measure_exact(int d, double r);

struct TubeMeasure {
  double exact;        // eps^{(d-2)/2}
  double stated_form;  // (1/2) eps^{(d-2)/2}, a halved variant kept for comparison
};

/// Mass of the set of S^{d-1} within distance r of the unit circle in the
/// first two coordinates. d > 3, 0 < r < 1.
/// theta_1^2 + theta_2^2 ~ Beta(1, (d-2)/2), so the mass is eps^{(d-2)/2}.
TubeMeasure circle_tube_measure(int d, double r);

struct BetaTail {
  double lower;
  double upper;
  std::optional<double> exact;  // set when alpha == 1: eps^beta
};

/// Bounds on Pr(Z >= 1 - eps) for Z ~ Beta(alpha, beta), alpha <= 1 <= beta.
BetaTail beta_tail(double alpha, double beta, double eps);

}  // namespace sparsecode
