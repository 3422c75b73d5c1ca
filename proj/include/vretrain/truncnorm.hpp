#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "vretrain/rng.hpp"

namespace vretrain {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Acceptance probabilities below this are reported as numerically
/// degenerate instead of being allowed to underflow into NaN moments.
inline constexpr double kMinAcceptance = 1e-300;

/// Standardized truncation interval (lower, upper) of a standard normal.
/// Either end may be infinite; lower < upper is enforced on construction.
class Bounds {
 public:
  Bounds(double lower, double upper);

  static Bounds unbounded() { return Bounds(-kInfinity, kInfinity); }

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  double width() const noexcept { return upper_ - lower_; }
  bool finite() const noexcept;

  bool operator==(const Bounds&) const = default;

 private:
  double lower_;
  double upper_;
};

/// Mean shift, variance factor and third central moment of a standard
/// normal restricted to a Bounds.
struct Moments {
  double m1 = 0.0;
  double m2 = 1.0;
  double m3 = 0.0;
};

struct ShiftedMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Closed-form truncated standard-normal moments. One-tail intervals are
/// evaluated through Mills ratios so that the normaliser never has to be
/// formed by subtraction of nearly equal CDF values.
///
/// Throws Error{NumericallyDegenerate} if the acceptance probability is
/// below kMinAcceptance.
Moments std_moments(const Bounds& bounds);

/// Mean and variance of N(mu, sigma^2) truncated to (a, b).
ShiftedMoments shifted_moments(double mu, double sigma, double a, double b);

/// Phi(upper) - Phi(lower) without cancellation.
double acceptance_probability(const Bounds& bounds);

/// log(Phi(upper) - Phi(lower)); finite even where the probability itself
/// underflows. Never throws for valid bounds.
double log_acceptance_probability(const Bounds& bounds) noexcept;

/// Independent oracle: moments by adaptive Gauss-Kronrod integration of the
/// truncated density, semi-infinite ends cut at |z| = 40.
/// Throws Error{QuadratureNonconvergence} if the 1e-12 target is missed.
Moments quadrature_moments(const Bounds& bounds);

/// Draws from the standard normal restricted to a Bounds.
///
/// Intervals with acceptance probability >= 1e-3 are inverted through the
/// CDF on the side of the interval with the smaller tail mass. Deeper tails
/// use rejection: an exponential proposal for wide intervals and a uniform
/// proposal for narrow ones.
class TruncatedNormalSampler {
 public:
  explicit TruncatedNormalSampler(const Bounds& bounds);

  double operator()(RngStream& stream) const;

  /// Sum of count draws, accumulated in draw order.
  double sum(std::size_t count, RngStream& stream) const;

  const Bounds& bounds() const noexcept { return bounds_; }

 private:
  enum class Method { Inversion, ExponentialTail, UniformRejection };

  double draw_inversion(RngStream& stream) const;
  double draw_exponential(RngStream& stream) const;
  double draw_uniform(RngStream& stream) const;

  Bounds bounds_;
  Method method_ = Method::Inversion;
  // Rejection samplers work on a right-tail interval [lo, hi]; mirrored
  // intervals flip the sign of each draw.
  bool mirrored_ = false;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double rate_ = 0.0;
  double uniform_peak_ = 0.0;
  // Inversion: lower tail mass, upper tail mass, interval mass.
  double lower_mass_ = 0.0;
  double upper_mass_ = 0.0;
  double mass_ = 0.0;
};

std::vector<double> sample_truncated(const Bounds& bounds, std::size_t count, RngStream& stream);

}  // namespace vretrain
