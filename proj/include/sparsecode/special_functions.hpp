#pragma once

namespace sparsecode {

/// log B(a, b).
double log_beta(double a, double b);

/// Regularized incomplete Beta function I_x(a, b), a, b > 0, x in [0, 1].
/// Continued-fraction expansion (modified Lentz), relative error ~1e-10 or better.
double regularized_incomplete_beta(double a, double b, double x);

/// Upper tail Pr(Z >= x) for Z ~ Beta(a, b), evaluated without cancellation.
double beta_upper_tail(double a, double b, double x);

}  // namespace sparsecode
