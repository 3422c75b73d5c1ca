#pragma once

// Standard normal special functions used by the truncated-moment code and
// the samplers. All functions accept +/-infinity.

namespace vretrain {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrt2 = 1.41421356237309504880;

/// Density phi(x).
double normal_pdf(double x) noexcept;

/// Lower tail Phi(x).
double normal_cdf(double x) noexcept;

/// Upper tail Q(x) = 1 - Phi(x), accurate for large positive x.
double normal_upper(double x) noexcept;

/// Mills ratio R(x) = Q(x) / phi(x). Finite for all x; R(+inf) = 0.
/// Uses a continued fraction beyond x = 8 where Q and phi would both
/// approach underflow.
double mills_ratio(double x) noexcept;

/// Inverse of Phi on (0, 1).
double normal_quantile(double p);

/// Inverse of Q on (0, 1), accurate for tiny p.
double normal_upper_quantile(double q);

}  // namespace vretrain
