#pragma once

#include <Eigen/Dense>

#include "vretrain/truncnorm.hpp"

namespace vretrain {

/// Directions within this distance of unit norm are accepted as-is.
inline constexpr double kUnitTolerance = 1e-10;
/// Directions within this distance are renormalised; beyond it is an error.
inline constexpr double kRenormalizeTolerance = 1e-6;

/// Default slack when a configuration omits it: E|xi| for xi ~ N(0, sigma^2).
double default_slack(double sigma) noexcept;

/// The verifier's knowledge set B_r(center) plus additive slack. A sample
/// (x, y) is accepted iff |y - x'center| <= radius * |x| + slack.
class KnowledgeBall {
 public:
  KnowledgeBall(Eigen::VectorXd center, double radius, double slack);

  const Eigen::VectorXd& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  double slack() const noexcept { return slack_; }
  Eigen::Index dimension() const noexcept { return center_.size(); }

  /// Half-width of the acceptance band along any unit direction.
  double half_width() const noexcept { return radius_ + slack_; }

 private:
  Eigen::VectorXd center_;
  double radius_;
  double slack_;
};

/// One-dimensional verifier: accepts x with lower < x < upper.
struct Interval1D {
  Interval1D(double lower, double upper);

  double lower;
  double upper;

  double midpoint() const noexcept { return 0.5 * (lower + upper); }
  bool finite() const noexcept;
};

/// |true_theta - center|.
double verifier_bias(const KnowledgeBall& ball, const Eigen::VectorXd& true_theta);

/// Binary accept/reject rule; boundary points are accepted.
bool verify_point(const KnowledgeBall& ball, const Eigen::VectorXd& x, double y);

/// Returns direction scaled to unit norm, renormalising small deviations
/// and throwing Error{NonUnitDirection} for large ones.
Eigen::VectorXd checked_unit(const Eigen::VectorXd& direction);

/// Interval on synthetic labels along a unit direction: the projection of
/// the centre plus/minus radius + slack.
Interval1D direction_interval(const KnowledgeBall& ball, const Eigen::VectorXd& direction);

/// Standardized truncation bounds on the label noise of y = v'theta_hat +
/// sigma*xi implied by the verifier along unit direction v.
Bounds direction_bounds(const KnowledgeBall& ball, const Eigen::VectorXd& direction,
                        const Eigen::VectorXd& generator_mean, double sigma);

/// ((a - mean)/sigma, (b - mean)/sigma).
Bounds interval_bounds_1d(const Interval1D& interval, double generator_mean, double sigma);

/// Lipschitz constant of the deterministic retraining map along each
/// direction: the truncated variance on the symmetric band of half-width
/// (radius + slack) / sigma.
double contraction_rate(const KnowledgeBall& ball, double sigma);

/// Same quantity from a standardized half-width.
double contraction_rate_from_half_width(double half_width);

}  // namespace vretrain
