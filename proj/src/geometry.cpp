#include "sparsecode/geometry.hpp"

#include <numbers>

namespace sparsecode {

ManifoldSpec ManifoldSpec::full_sphere(int d) {
  if (d < 2) throw ParameterError("FullSphere requires d >= 2");
  return ManifoldSpec(ManifoldKind::FullSphere, d, d - 1);
}

ManifoldSpec ManifoldSpec::circle(int d) {
  if (d < 3) throw ParameterError("Circle requires d >= 3");
  return ManifoldSpec(ManifoldKind::Circle, d, 1);
}

ManifoldSpec ManifoldSpec::sub_sphere(int d, int d_o) {
  if (d < 2) throw ParameterError("SubSphere requires d >= 2");
  if (d_o < 1 || d_o >= d) throw ParameterError("SubSphere requires 1 <= d_o < d");
  return ManifoldSpec(ManifoldKind::SubSphere, d, d_o);
}

std::string ManifoldSpec::name() const {
  switch (kind_) {
    case ManifoldKind::FullSphere:
      return "FullSphere(" + std::to_string(ambient_dim_) + ")";
    case ManifoldKind::Circle:
      return "Circle(" + std::to_string(ambient_dim_) + ")";
    case ManifoldKind::SubSphere:
      return "SubSphere(" + std::to_string(ambient_dim_) + "," + std::to_string(intrinsic_dim_) + ")";
  }
  return "?";
}

DistributionSpec DistributionSpec::uniform_sphere(int d) {
  if (d < 2) throw ParameterError("UniformSphere requires d >= 2");
  return DistributionSpec(DistributionKind::UniformSphere, d, 0.0, std::nullopt);
}

DistributionSpec DistributionSpec::gaussian(int d, double sigma) {
  if (d < 2) throw ParameterError("Gaussian requires d >= 2");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("Gaussian requires sigma > 0");
  return DistributionSpec(DistributionKind::Gaussian, d, sigma, std::nullopt);
}

DistributionSpec DistributionSpec::data_attuned(const ManifoldSpec& manifold) {
  return DistributionSpec(DistributionKind::DataAttuned, manifold.ambient_dim(), 0.0, manifold);
}

std::string DistributionSpec::name() const {
  switch (kind_) {
    case DistributionKind::UniformSphere:
      return "UniformSphere(" + std::to_string(dim_) + ")";
    case DistributionKind::Gaussian:
      return "Gaussian(" + std::to_string(dim_) + ",sigma=" + std::to_string(sigma_) + ")";
    case DistributionKind::DataAttuned:
      return "DataAttuned(" + manifold_->name() + ")";
  }
  return "?";
}

TargetFunction TargetFunction::triangular(double lambda) {
  if (!(lambda > 0.0)) throw ParameterError("Triangular target requires lambda > 0");
  return TargetFunction(TargetKind::Triangular, lambda);
}

TargetFunction TargetFunction::coordinate(int axis) {
  if (axis < 0) throw ParameterError("Coordinate target requires axis >= 0");
  TargetFunction f(TargetKind::Coordinate, 1.0);
  f.axis_ = axis;
  return f;
}

TargetFunction TargetFunction::cosine_to_point(double lambda, Vector<double> anchor) {
  if (!(lambda > 0.0)) throw ParameterError("CosineOfAngleToFixedPoint target requires lambda > 0");
  if (anchor.size() > 0 && std::abs(anchor.norm() - 1.0) > kUnitTolerance)
    throw ParameterError("CosineOfAngleToFixedPoint anchor must be a unit vector");
  TargetFunction f(TargetKind::CosineOfAngleToFixedPoint, lambda);
  f.anchor_ = std::move(anchor);
  return f;
}

TargetFunction TargetFunction::constant(double c) {
  TargetFunction f(TargetKind::Constant, 0.0);
  f.value_ = c;
  return f;
}

std::string TargetFunction::name() const {
  switch (kind_) {
    case TargetKind::Triangular:
      return "Triangular(" + std::to_string(lambda_) + ")";
    case TargetKind::Coordinate:
      return "Coordinate(" + std::to_string(axis_) + ")";
    case TargetKind::CosineOfAngleToFixedPoint:
      return "CosineOfAngleToFixedPoint(" + std::to_string(lambda_) + ")";
    case TargetKind::Constant:
      return "Constant(" + std::to_string(value_) + ")";
  }
  return "?";
}

double circle_angle(double x1, double x2) {
  double phi = std::atan2(x2, x1);
  if (phi <= 0.0) phi += 2.0 * std::numbers::pi;
  return phi;
}

double TargetFunction::triangular_at(const Vector<double>& x) const {
  if (x.size() < 2) throw DomainError("triangular target needs at least two coordinates");
  const bool on_circle =
      std::abs(std::hypot(x[0], x[1]) - 1.0) <= kUnitTolerance &&
      (x.size() == 2 || x.tail(x.size() - 2).lpNorm<Eigen::Infinity>() <= kUnitTolerance);
  if (!on_circle) throw DomainError("triangular target evaluated off the circle");
  const double phi = circle_angle(x[0], x[1]);
  constexpr double pi = std::numbers::pi;
  return phi <= pi ? 2.0 * lambda_ * phi / pi : 2.0 * lambda_ * (2.0 * pi - phi) / pi;
}

}  // namespace sparsecode
