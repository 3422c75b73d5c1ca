#include "vretrain/verifier.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vretrain/errors.hpp"

namespace vretrain {

double default_slack(double sigma) noexcept { return std::sqrt(2.0 / std::numbers::pi) * sigma; }

KnowledgeBall::KnowledgeBall(Eigen::VectorXd center, double radius, double slack)
    : center_(std::move(center)), radius_(radius), slack_(slack) {
  if (!(radius >= 0.0) || !(slack >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "radius and slack must be non-negative");
  }
  if (!(radius + slack > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "radius + slack must be positive");
  }
  if (center_.size() == 0 || !center_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "centre must be a non-empty finite vector");
  }
}

Interval1D::Interval1D(double lower_, double upper_) : lower(lower_), upper(upper_) {
  if (std::isnan(lower) || std::isnan(upper) || !(lower < upper)) {
    throw Error(ErrorKind::InvalidBounds, "interval requires lower < upper");
  }
}

bool Interval1D::finite() const noexcept { return std::isfinite(lower) && std::isfinite(upper); }

double verifier_bias(const KnowledgeBall& ball, const Eigen::VectorXd& true_theta) {
  if (true_theta.size() != ball.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "true parameter and centre differ in dimension");
  }
  return (true_theta - ball.center()).norm();
}

bool verify_point(const KnowledgeBall& ball, const Eigen::VectorXd& x, double y) {
  if (x.size() != ball.dimension()) {
    throw Error(ErrorKind::DimensionMismatch,
                "covariate has dimension " + std::to_string(x.size()) + ", verifier expects " +
                    std::to_string(ball.dimension()));
  }
  return std::abs(y - x.dot(ball.center())) <= ball.radius() * x.norm() + ball.slack();
}

Eigen::VectorXd checked_unit(const Eigen::VectorXd& direction) {
  const double norm = direction.norm();
  const double deviation = std::abs(norm - 1.0);
  if (deviation <= kUnitTolerance) return direction;
  if (deviation <= kRenormalizeTolerance) return direction / norm;
  throw Error(ErrorKind::NonUnitDirection,
              "direction norm deviates from 1 by " + std::to_string(deviation));
}

Interval1D direction_interval(const KnowledgeBall& ball, const Eigen::VectorXd& direction) {
  if (direction.size() != ball.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "direction and centre differ in dimension");
  }
  const double projected_center = checked_unit(direction).dot(ball.center());
  return Interval1D(projected_center - ball.half_width(), projected_center + ball.half_width());
}

Bounds interval_bounds_1d(const Interval1D& interval, double generator_mean, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  return Bounds((interval.lower - generator_mean) / sigma, (interval.upper - generator_mean) / sigma);
}

Bounds direction_bounds(const KnowledgeBall& ball, const Eigen::VectorXd& direction,
                        const Eigen::VectorXd& generator_mean, double sigma) {
  if (generator_mean.size() != ball.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "generator mean and centre differ in dimension");
  }
  // Along v the verifier is exactly a 1-D interval on the label; the label
  // mean is the projection of the generator's parameter.
  const Interval1D interval = direction_interval(ball, direction);
  return interval_bounds_1d(interval, checked_unit(direction).dot(generator_mean), sigma);
}

double contraction_rate_from_half_width(double half_width) {
  if (!(half_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "half-width must be positive");
  if (std::isinf(half_width)) return 1.0;
  return std_moments(Bounds(-half_width, half_width)).m2;
}

double contraction_rate(const KnowledgeBall& ball, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  return contraction_rate_from_half_width(ball.half_width() / sigma);
}

}  // namespace vretrain
