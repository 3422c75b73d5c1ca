#include "vretrain/truncnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vretrain/errors.hpp"
#include "vretrain/normal.hpp"

namespace vretrain {

namespace {

constexpr double kLogInvSqrt2Pi = -0.91893853320467274178;
constexpr double kInversionThreshold = 1e-3;
constexpr double kQuadratureCut = 40.0;
constexpr double kQuadratureTarget = 1e-12;

std::string describe(const Bounds& b) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << b.lower() << ", " << b.upper() << ")";
  return os.str();
}

// phi(lower)/Z and phi(upper)/Z together with log Z, Z = Phi(upper) - Phi(lower).
struct DensityRatios {
  double at_lower = 0.0;
  double at_upper = 0.0;
  double log_mass = 0.0;
};

// Right-tail interval 0 <= lo < hi: Z = phi(lo) * (R(lo) - e * R(hi)) with
// e = phi(hi)/phi(lo), so neither Z nor phi(lo) is ever formed on its own.
DensityRatios right_tail_ratios(double lo, double hi) {
  const double e = std::isinf(hi) ? 0.0 : std::exp(-0.5 * (hi - lo) * (hi + lo));
  const double upper_mills = std::isinf(hi) ? 0.0 : mills_ratio(hi);
  const double scaled_mass = mills_ratio(lo) - e * upper_mills;
  DensityRatios r;
  r.at_lower = 1.0 / scaled_mass;
  r.at_upper = e / scaled_mass;
  r.log_mass = kLogInvSqrt2Pi - 0.5 * lo * lo + std::log(scaled_mass);
  return r;
}

DensityRatios density_ratios(const Bounds& b) {
  const double lo = b.lower();
  const double hi = b.upper();
  if (lo >= 0.0) return right_tail_ratios(lo, hi);
  if (hi <= 0.0) {
    const DensityRatios m = right_tail_ratios(-hi, -lo);
    return {m.at_upper, m.at_lower, m.log_mass};
  }
  // Straddles zero: the two erf terms have opposite signs, no cancellation.
  const double mass = 0.5 * (std::erf(hi / kSqrt2) - std::erf(lo / kSqrt2));
  return {normal_pdf(lo) / mass, normal_pdf(hi) / mass, std::log(mass)};
}

void require_nondegenerate(const Bounds& b, double log_mass) {
  if (!(log_mass >= std::log(kMinAcceptance))) {
    throw Error(ErrorKind::NumericallyDegenerate,
                "acceptance probability of " + describe(b) + " is below 1e-300");
  }
}

// x * f with the convention that the product vanishes at an infinite end
// (the density decays faster than any polynomial grows).
double weighted(double x, double f) { return std::isinf(x) ? 0.0 : x * f; }

}  // namespace

Bounds::Bounds(double lower, double upper) : lower_(lower), upper_(upper) {
  if (std::isnan(lower) || std::isnan(upper) || !(lower < upper) || lower == kInfinity ||
      upper == -kInfinity) {
    std::ostringstream os;
    os.precision(17);
    os << "bounds require lower < upper, got (" << lower << ", " << upper << ")";
    throw Error(ErrorKind::InvalidBounds, os.str());
  }
}

bool Bounds::finite() const noexcept { return std::isfinite(lower_) && std::isfinite(upper_); }

double log_acceptance_probability(const Bounds& bounds) noexcept {
  if (std::isinf(bounds.lower()) && std::isinf(bounds.upper())) return 0.0;
  return density_ratios(bounds).log_mass;
}

double acceptance_probability(const Bounds& bounds) {
  const double log_mass = log_acceptance_probability(bounds);
  require_nondegenerate(bounds, log_mass);
  return std::min(1.0, std::exp(log_mass));
}

Moments std_moments(const Bounds& bounds) {
  const double lo = bounds.lower();
  const double hi = bounds.upper();
  if (std::isinf(lo) && std::isinf(hi)) return Moments{0.0, 1.0, 0.0};

  const DensityRatios r = density_ratios(bounds);
  require_nondegenerate(bounds, r.log_mass);

  const double a = r.at_lower;
  const double b = r.at_upper;
  const double diff = b - a;
  const double edge = weighted(hi, b) - weighted(lo, a);
  const double curvature = (std::isinf(hi) ? 0.0 : (hi * hi - 1.0) * b) -
                           (std::isinf(lo) ? 0.0 : (lo * lo - 1.0) * a);

  Moments m;
  m.m1 = -diff;
  m.m2 = 1.0 - edge - diff * diff;
  m.m3 = -curvature - 3.0 * diff * edge - 2.0 * diff * diff * diff;

  if (!(m.m2 > 0.0 && m.m2 <= 1.0) || !std::isfinite(m.m1) || !std::isfinite(m.m3)) {
    throw Error(ErrorKind::NumericallyDegenerate,
                "moments of " + describe(bounds) + " lost all precision");
  }
  return m;
}

ShiftedMoments shifted_moments(double mu, double sigma, double a, double b) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  const Moments m = std_moments(Bounds((a - mu) / sigma, (b - mu) / sigma));
  return {mu + sigma * m.m1, sigma * sigma * m.m2};
}

namespace {

using Kronrod15 = boost::math::quadrature::gauss_kronrod<double, 15>;

constexpr double kPanelTolerance = 1e-14;
constexpr unsigned kMaxBisections = 40;

template <class F>
double panel_l1(F& f, double a, double b) {
  double error = 0.0;
  double l1 = 0.0;
  Kronrod15::integrate(f, a, b, 0, 0.0, &error, &l1);
  return l1;
}

// Bisects until each panel's Kronrod-Gauss difference, scaled to the panel
// width, is below its share of the tolerance or at rounding level.
template <class F>
void adaptive_panels(F& f, double a, double b, double tolerance, unsigned depth, double& value, double& error) {
  double local_error = 0.0;
  const double estimate = Kronrod15::integrate(f, a, b, 0, 0.0, &local_error, nullptr);
  local_error *= 0.5 * (b - a);
  const double rounding = 50.0 * std::numeric_limits<double>::epsilon() * std::abs(estimate);
  if (local_error <= std::max(tolerance, rounding) || depth == 0) {
    value += estimate;
    error += local_error;
    return;
  }
  const double mid = 0.5 * (a + b);
  adaptive_panels(f, a, mid, 0.5 * tolerance, depth - 1, value, error);
  adaptive_panels(f, mid, b, 0.5 * tolerance, depth - 1, value, error);
}

}  // namespace

Moments quadrature_moments(const Bounds& bounds) {
  const double lo = std::isinf(bounds.lower()) ? -kQuadratureCut : bounds.lower();
  const double hi = std::isinf(bounds.upper()) ? kQuadratureCut : bounds.upper();
  if (!(lo < hi)) {
    throw Error(ErrorKind::NumericallyDegenerate,
                "bounds " + describe(bounds) + " lie beyond the quadrature cut-off");
  }

  // Scale the density by its maximum over the interval so the integrands
  // are O(1) even deep in a tail.
  const double peak = std::clamp(0.0, lo, hi);
  const double log_mass_offset = kLogInvSqrt2Pi - 0.5 * peak * peak;
  auto density = [peak](double z) { return std::exp(0.5 * (peak - z) * (peak + z)); };

  auto integrate = [&](auto&& f) {
    double value = 0.0;
    double error = 0.0;
    const double scale = panel_l1(f, lo, hi);
    adaptive_panels(f, lo, hi, kPanelTolerance * std::max(scale, 1e-300), kMaxBisections, value, error);
    return std::pair{value, error};
  };

  const auto [mass, mass_err] = integrate(density);
  if (!(std::log(mass) + log_mass_offset >= std::log(kMinAcceptance))) {
    throw Error(ErrorKind::NumericallyDegenerate,
                "acceptance probability of " + describe(bounds) + " is below 1e-300");
  }
  const auto [first, first_err] = integrate([&](double z) { return z * density(z); });
  const double mean = first / mass;

  const auto [second, second_err] = integrate([&](double z) {
    const double d = z - mean;
    return d * d * density(z);
  });
  const auto [third, third_err] = integrate([&](double z) {
    const double d = z - mean;
    return d * d * d * density(z);
  });

  const double worst = std::max({mass_err, first_err, second_err, third_err}) / mass;
  if (!(worst <= kQuadratureTarget)) {
    std::ostringstream os;
    os << "estimated error " << worst << " exceeds 1e-12 on " << describe(bounds);
    throw Error(ErrorKind::QuadratureNonconvergence, os.str());
  }
  return Moments{mean, second / mass, third / mass};
}

TruncatedNormalSampler::TruncatedNormalSampler(const Bounds& bounds) : bounds_(bounds) {
  const double log_mass = log_acceptance_probability(bounds);
  require_nondegenerate(bounds, log_mass);
  mass_ = std::min(1.0, std::exp(log_mass));

  if (mass_ >= kInversionThreshold) {
    method_ = Method::Inversion;
    lower_mass_ = normal_cdf(bounds.lower());
    upper_mass_ = normal_upper(bounds.upper());
    return;
  }

  // Deep tail (or very narrow interval): rejection on a right-tail interval.
  if (bounds.upper() <= 0.0) {
    mirrored_ = true;
    lo_ = -bounds.upper();
    hi_ = -bounds.lower();
  } else {
    lo_ = bounds.lower();
    hi_ = bounds.upper();
  }

  if (lo_ < 0.0) {
    // Narrow interval straddling zero; density peaks at 0.
    method_ = Method::UniformRejection;
    uniform_peak_ = 0.0;
    return;
  }
  if (std::isinf(hi_) || (hi_ - lo_) * (hi_ + lo_) > 2.0) {
    method_ = Method::ExponentialTail;
    rate_ = 0.5 * (lo_ + std::sqrt(lo_ * lo_ + 4.0));
  } else {
    method_ = Method::UniformRejection;
    uniform_peak_ = lo_;
  }
}

double TruncatedNormalSampler::draw_inversion(RngStream& stream) const {
  const double u = stream.uniform_open();
  const double p = lower_mass_ + u * mass_;
  double x;
  if (p <= 0.5) {
    x = normal_quantile(p);
  } else {
    x = normal_upper_quantile(upper_mass_ + (1.0 - u) * mass_);
  }
  return std::clamp(x, bounds_.lower(), bounds_.upper());
}

double TruncatedNormalSampler::draw_exponential(RngStream& stream) const {
  for (;;) {
    const double x = lo_ + stream.exponential() / rate_;
    if (x > hi_) continue;
    const double d = x - rate_;
    if (stream.uniform_open() <= std::exp(-0.5 * d * d)) return mirrored_ ? -x : x;
  }
}

double TruncatedNormalSampler::draw_uniform(RngStream& stream) const {
  const double width = hi_ - lo_;
  for (;;) {
    const double x = lo_ + width * stream.uniform();
    if (stream.uniform_open() <= std::exp(0.5 * (uniform_peak_ - x) * (uniform_peak_ + x))) {
      return mirrored_ ? -x : x;
    }
  }
}

double TruncatedNormalSampler::operator()(RngStream& stream) const {
  switch (method_) {
    case Method::Inversion: return draw_inversion(stream);
    case Method::ExponentialTail: return draw_exponential(stream);
    case Method::UniformRejection: return draw_uniform(stream);
  }
  return 0.0;
}

double TruncatedNormalSampler::sum(std::size_t count, RngStream& stream) const {
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) total += (*this)(stream);
  return total;
}

std::vector<double> sample_truncated(const Bounds& bounds, std::size_t count, RngStream& stream) {
  std::vector<double> out;
  if (count == 0) return out;
  const TruncatedNormalSampler sampler(bounds);
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler(stream));
  return out;
}

}  // namespace vretrain
