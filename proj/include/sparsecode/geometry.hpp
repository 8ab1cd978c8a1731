#pragma once

// Input and expansion distributions, synthetic manifolds with exact
// projections, and Lipschitz target functions.
//
// Batches of points are stored one point per column (d x n), expansion rows
// one row per unit (m x d).

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "sparsecode/errors.hpp"
#include "sparsecode/random.hpp"

namespace sparsecode {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

inline constexpr double kUnitTolerance = 1e-9;

/// A point on S^{d-1}. Construction either normalizes or checks the norm.
template <typename Scalar = double>
class UnitVector {
 public:
  template <typename Derived>
  static UnitVector normalize(const Eigen::MatrixBase<Derived>& v) {
    const Scalar n = v.norm();
    if (!(n > Scalar(0)) || !std::isfinite(static_cast<double>(n)))
      throw DegenerateInputError("cannot normalize a zero or non-finite vector");
    return UnitVector(Vector<Scalar>(v.template cast<Scalar>() / n));
  }

  template <typename Derived>
  static UnitVector checked(const Eigen::MatrixBase<Derived>& v) {
    if (std::abs(static_cast<double>(v.norm()) - 1.0) > kUnitTolerance)
      throw ParameterError("vector is not unit-norm within 1e-9");
    return UnitVector(Vector<Scalar>(v.template cast<Scalar>()));
  }

  const Vector<Scalar>& coords() const noexcept { return coords_; }
  Index dim() const noexcept { return coords_.size(); }
  Scalar operator[](Index i) const { return coords_[i]; }

 private:
  explicit UnitVector(Vector<Scalar> v) : coords_(std::move(v)) {}
  Vector<Scalar> coords_;
};

using UnitVectord = UnitVector<double>;

// ---------------------------------------------------------------------------
// Manifolds

enum class ManifoldKind { FullSphere, Circle, SubSphere };

/// Regularity constants of the almost-uniform measure. They are carried for
/// documentation only; nothing in the library computes with them.
struct Regularity {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
  double r_o = 1.0;
};

/// A synthetic input manifold inside S^{d-1} with uniform measure.
///
/// FullSphere(d): all of S^{d-1}, intrinsic dimension d-1.
/// Circle(d): unit circle in the first two coordinates, d >= 3.
/// SubSphere(d, d_o): unit d_o-sphere in the first d_o + 1 coordinates.
///
/// All three have reach 1 and an exact nearest-point projection.
class ManifoldSpec {
 public:
  static ManifoldSpec full_sphere(int d);
  static ManifoldSpec circle(int d);
  static ManifoldSpec sub_sphere(int d, int d_o);

  ManifoldKind kind() const noexcept { return kind_; }
  int ambient_dim() const noexcept { return ambient_dim_; }
  int intrinsic_dim() const noexcept { return intrinsic_dim_; }
  double reach() const noexcept { return 1.0; }
  const Regularity& regularity() const noexcept { return regularity_; }
  void set_regularity(const Regularity& r) { regularity_ = r; }

  // Number of leading coordinates that can be non-zero.
  int support_dim() const noexcept { return intrinsic_dim_ + 1; }

  std::string name() const;

  // True when x lies on the manifold within `tol`.
  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x, double tol = kUnitTolerance) const {
    if (x.size() != ambient_dim_) return false;
    const int s = support_dim();
    if (s < ambient_dim_ && x.tail(ambient_dim_ - s).template lpNorm<Eigen::Infinity>() > tol)
      return false;
    return std::abs(static_cast<double>(x.head(s).norm()) - 1.0) <= tol;
  }

  bool operator==(const ManifoldSpec& o) const noexcept {
    return kind_ == o.kind_ && ambient_dim_ == o.ambient_dim_ && intrinsic_dim_ == o.intrinsic_dim_;
  }

 private:
  ManifoldSpec(ManifoldKind kind, int d, int d_o) : kind_(kind), ambient_dim_(d), intrinsic_dim_(d_o) {}

  ManifoldKind kind_;
  int ambient_dim_;
  int intrinsic_dim_;
  Regularity regularity_{};
};

/// Streams i.i.d. uniform samples from a manifold. Points are normalized
/// isotropic Gaussian draws in the leading support block, so consecutive
/// calls to `next` produce the same sequence as one large call.
class ManifoldSampler {
 public:
  ManifoldSampler(const ManifoldSpec& manifold, std::uint64_t seed)
      : manifold_(manifold), rng_(seed) {}

  template <typename Scalar = double>
  Matrix<Scalar> next(Index n) {
    Matrix<Scalar> out(manifold_.ambient_dim(), n);
    fill<Scalar>(out);
    return out;
  }

  template <typename Scalar>
  void fill(Eigen::Ref<Matrix<Scalar>> out) {
    const int s = manifold_.support_dim();
    const int d = manifold_.ambient_dim();
    if (out.rows() != d) throw ShapeError("sampler output has wrong row count");
    Vector<double> block(s);
    for (Index i = 0; i < out.cols(); ++i) {
      double n2 = 0.0;
      do {
        for (int r = 0; r < s; ++r) block[r] = normal_(rng_);
        n2 = block.squaredNorm();
      } while (!(n2 > 0.0));
      block /= std::sqrt(n2);
      out.col(i).head(s) = block.cast<Scalar>();
      if (s < d) out.col(i).tail(d - s).setZero();
    }
  }

  const ManifoldSpec& manifold() const noexcept { return manifold_; }

 private:
  ManifoldSpec manifold_;
  Rng rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// n i.i.d. uniform samples from `manifold`, one per column.
template <typename Scalar = double>
Matrix<Scalar> sample_input(const ManifoldSpec& manifold, std::uint64_t seed, Index n) {
  if (n < 1) throw ParameterError("sample_input: n must be >= 1");
  return ManifoldSampler(manifold, seed).next<Scalar>(n);
}

// ---------------------------------------------------------------------------
// Expansion-row distributions

enum class DistributionKind { UniformSphere, Gaussian, DataAttuned };

class DistributionSpec {
 public:
  static DistributionSpec uniform_sphere(int d);
  static DistributionSpec gaussian(int d, double sigma = 1.0);
  // Rows drawn from the same uniform measure as the data.
  static DistributionSpec data_attuned(const ManifoldSpec& manifold);

  DistributionKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  double sigma() const noexcept { return sigma_; }
  const std::optional<ManifoldSpec>& manifold() const noexcept { return manifold_; }

  std::string name() const;

 private:
  DistributionSpec(DistributionKind kind, int d, double sigma, std::optional<ManifoldSpec> m)
      : kind_(kind), dim_(d), sigma_(sigma), manifold_(std::move(m)) {}

  DistributionKind kind_;
  int dim_;
  double sigma_;
  std::optional<ManifoldSpec> manifold_;
};

/// m i.i.d. rows from `dist`, returned as an m x d matrix.
template <typename Scalar = double>
Matrix<Scalar> sample_expansion_rows(const DistributionSpec& dist, Index m, std::uint64_t seed) {
  if (m < 1) throw ParameterError("sample_expansion_rows: m must be >= 1");
  const int d = dist.dim();
  switch (dist.kind()) {
    case DistributionKind::DataAttuned:
      return sample_input<Scalar>(*dist.manifold(), seed, m).transpose();
    case DistributionKind::UniformSphere:
      return sample_input<Scalar>(ManifoldSpec::full_sphere(d), seed, m).transpose();
    case DistributionKind::Gaussian: {
      Rng rng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      Matrix<Scalar> rows(m, d);
      for (Index j = 0; j < m; ++j)
        for (int c = 0; c < d; ++c) rows(j, c) = static_cast<Scalar>(dist.sigma() * normal(rng));
      return rows;
    }
  }
  throw ParameterError("unknown distribution kind");
}

// ---------------------------------------------------------------------------
// Projection onto the manifold

template <typename Scalar>
struct Projection {
  UnitVector<Scalar> point;
  Scalar delta;  // ||theta - point||
};

/// Nearest manifold point of `theta` and its distance. The leading support
/// block of theta must be non-zero.
template <typename Derived>
Projection<typename Derived::Scalar> project_to_manifold(const ManifoldSpec& manifold,
                                                         const Eigen::MatrixBase<Derived>& theta) {
  using Scalar = typename Derived::Scalar;
  const int d = manifold.ambient_dim();
  if (theta.size() != d) throw ShapeError("project_to_manifold: dimension mismatch");
  const int s = manifold.support_dim();
  const Scalar lead = theta.head(s).norm();
  if (!(lead > Scalar(0)))
    throw DegenerateInputError("project_to_manifold: leading block of theta is zero");
  Vector<Scalar> p = Vector<Scalar>::Zero(d);
  p.head(s) = theta.head(s) / lead;
  const Scalar delta = (theta - p).norm();
  return {UnitVector<Scalar>::checked(p), delta};
}

// ---------------------------------------------------------------------------
// Target functions

enum class TargetKind { Triangular, Coordinate, CosineOfAngleToFixedPoint, Constant };

/// A Lipschitz function on the unit sphere.
///
/// Triangular(lambda): defined on the circle only; with phi = angle of
/// (x1, x2) in (0, 2 pi], f = 2 lambda phi / pi for phi <= pi and
/// 2 lambda (2 pi - phi) / pi otherwise.
/// Coordinate(axis): f = x[axis], Lipschitz constant 1.
/// CosineOfAngleToFixedPoint(lambda): f = lambda * <x, anchor>, anchor a unit
/// vector (e_0 when not given).
/// Constant(c): Lipschitz constant 0.
class TargetFunction {
 public:
  static TargetFunction triangular(double lambda);
  static TargetFunction coordinate(int axis);
  static TargetFunction cosine_to_point(double lambda, Vector<double> anchor = {});
  static TargetFunction constant(double c);

  TargetKind kind() const noexcept { return kind_; }
  double lipschitz() const noexcept { return lambda_; }
  int axis() const noexcept { return axis_; }
  double constant_value() const noexcept { return value_; }
  const Vector<double>& anchor() const noexcept { return anchor_; }

  std::string name() const;

  template <typename Derived>
  double operator()(const Eigen::MatrixBase<Derived>& x) const {
    switch (kind_) {
      case TargetKind::Constant:
        return value_;
      case TargetKind::Coordinate:
        if (axis_ >= x.size()) throw ShapeError("coordinate target: axis out of range");
        return static_cast<double>(x[axis_]);
      case TargetKind::CosineOfAngleToFixedPoint: {
        if (anchor_.size() == 0) return lambda_ * static_cast<double>(x[0]);
        if (anchor_.size() != x.size()) throw ShapeError("cosine target: anchor dimension mismatch");
        return lambda_ * static_cast<double>(x.template cast<double>().dot(anchor_));
      }
      case TargetKind::Triangular:
        return triangular_at(x.template cast<double>().eval());
    }
    return 0.0;
  }

 private:
  TargetFunction(TargetKind kind, double lambda) : kind_(kind), lambda_(lambda) {}
  double triangular_at(const Vector<double>& x) const;

  TargetKind kind_;
  double lambda_;
  int axis_ = 0;
  double value_ = 0.0;
  Vector<double> anchor_;
};

/// Angle of (x1, x2) mapped to (0, 2 pi].
double circle_angle(double x1, double x2);

template <typename Scalar>
double evaluate_target(const TargetFunction& f, const UnitVector<Scalar>& x) {
  return f(x.coords());
}

}  // namespace sparsecode
