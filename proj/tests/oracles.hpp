#pragma once

// Reference computations used only by tests. They are deliberately naive so
// that they share no code path with the library.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

struct RawMoments {
  double m1, m2, m3;
};

/// Truncated standard-normal mean, variance and third central moment by
/// brute-force integration; infinite ends are cut at +/-12.
inline RawMoments truncated_moments(double lo, double hi) {
  lo = std::max(lo, -12.0);
  hi = std::min(hi, 12.0);
  const double z = simpson(phi, lo, hi);
  const double mean = simpson([](double x) { return x * phi(x); }, lo, hi) / z;
  const double var = simpson([&](double x) { return (x - mean) * (x - mean) * phi(x); }, lo, hi) / z;
  const double third = simpson([&](double x) { return std::pow(x - mean, 3) * phi(x); }, lo, hi) / z;
  return {mean, var, third};
}

}  // namespace oracle
