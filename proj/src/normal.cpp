#include "vretrain/normal.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

namespace vretrain {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMillsSwitch = 8.0;
constexpr int kMillsDepth = 120;
}  // namespace

double normal_pdf(double x) noexcept {
  if (std::isinf(x)) return 0.0;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_upper(double x) noexcept { return 0.5 * std::erfc(x / kSqrt2); }

double mills_ratio(double x) noexcept {
  if (x == kInf) return 0.0;
  if (x <= kMillsSwitch) return normal_upper(x) / normal_pdf(x);
  // R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))), evaluated bottom-up.
  double tail = x;
  for (int k = kMillsDepth; k >= 1; --k) tail = x + k / tail;
  return 1.0 / tail;
}

double normal_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_upper_quantile(double q) {
  if (q <= 0.0) return kInf;
  if (q >= 1.0) return -kInf;
  return kSqrt2 * boost::math::erfc_inv(2.0 * q);
}

}  // namespace vretrain
