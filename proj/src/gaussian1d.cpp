#include "vretrain/gaussian1d.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vretrain/errors.hpp"

namespace vretrain {

void Gaussian1DConfig::validate() const {
  if (n0 < 1) throw Error(ErrorKind::InvalidArgument, "n0 must be >= 1");
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  if (schedule.size() < rounds) {
    throw Error(ErrorKind::InvalidArgument, "schedule has " + std::to_string(schedule.size()) +
                                                " entries for " + std::to_string(rounds) + " rounds");
  }
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (schedule[k] < 1) throw Error(ErrorKind::InvalidArgument, "schedule counts must be >= 1");
    if (k > 0 && schedule[k] < schedule[k - 1]) {
      throw Error(ErrorKind::InvalidArgument, "schedule must be non-decreasing");
    }
  }
}

std::vector<double> Trajectory1D::means() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.mean_estimate);
  return out;
}

double initial_mean(const Gaussian1DConfig& config, RngStream& stream) {
  if (config.n0 < 1) throw Error(ErrorKind::InvalidArgument, "n0 must be >= 1");
  double total = 0.0;
  for (long long i = 0; i < config.n0; ++i) total += stream.normal();
  return config.true_mean + config.sigma * (total / static_cast<double>(config.n0));
}

double filtered_mean_step(double current_mean, double sigma, const Interval1D& interval,
                          long long count, FilterMode mode, RngStream& stream) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "verified sample count must be >= 1");
  const auto n = static_cast<std::size_t>(count);

  switch (mode) {
    case FilterMode::None: {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += stream.normal();
      return current_mean + sigma * (total / static_cast<double>(n));
    }
    case FilterMode::Direct: {
      const TruncatedNormalSampler sampler(interval_bounds_1d(interval, current_mean, sigma));
      return current_mean + sigma * (sampler.sum(n, stream) / static_cast<double>(n));
    }
    case FilterMode::Reject: {
      if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t attempts = 0;
        for (;;) {
          if (++attempts > kMaxAttemptsPerSample) {
            throw Error(ErrorKind::MaxAttemptsExceeded,
                        "no accepted synthetic sample after " + std::to_string(kMaxAttemptsPerSample) +
                            " attempts");
          }
          const double candidate = current_mean + sigma * stream.normal();
          if (interval.lower <= candidate && candidate <= interval.upper) {
            total += candidate;
            break;
          }
        }
      }
      return total / static_cast<double>(n);
    }
  }
  return current_mean;
}

double retrain_step(double current_mean, const Gaussian1DConfig& config, long long count,
                    RngStream& stream) {
  return filtered_mean_step(current_mean, config.sigma, config.interval, count, config.mode, stream);
}

namespace {

Record1D make_record(const Gaussian1DConfig& config, std::size_t round, double mean, long long samples) {
  Record1D r;
  r.round = round;
  r.mean_estimate = mean;
  r.standardized_error = (mean - config.true_mean) / config.sigma;
  r.dist_midpoint = config.interval.finite() ? std::abs(mean - config.interval.midpoint())
                                             : std::numeric_limits<double>::quiet_NaN();
  r.samples = samples;
  return r;
}

bool crossed(double value, const StopRule& rule) {
  return rule.direction == Crossing::Down ? value <= rule.level : value >= rule.level;
}

}  // namespace

Trajectory1D run_iterations(const Gaussian1DConfig& config, const ReplicationStreams& streams,
                            std::optional<StopRule> stop) {
  config.validate();
  Trajectory1D out;
  out.records.reserve(config.rounds + 1);

  RngStream real = streams.at(0);
  double mean = initial_mean(config, real);
  out.records.push_back(make_record(config, 0, mean, config.n0));
  if (stop && crossed(mean, *stop)) return out;

  for (std::size_t k = 0; k < config.rounds; ++k) {
    RngStream stream = streams.at(k + 1);
    try {
      mean = retrain_step(mean, config, config.schedule[k], stream);
    } catch (const Error& e) {
      throw Error(e.kind(), "round " + std::to_string(k + 1) + ": " + e.what());
    }
    out.records.push_back(make_record(config, k + 1, mean, config.schedule[k]));
    if (stop && crossed(mean, *stop)) break;
  }
  return out;
}

double deterministic_map(const Bounds& bounds, double x) {
  return x + std_moments(Bounds(bounds.lower() - x, bounds.upper() - x)).m1;
}

double map_slope(const Bounds& bounds, double x) {
  return std_moments(Bounds(bounds.lower() - x, bounds.upper() - x)).m2;
}

double one_step_mse_prediction_1d(const Bounds& bounds, long long n0, long long n1) {
  if (n0 < 1 || n1 < 1) throw Error(ErrorKind::InvalidArgument, "sample sizes must be >= 1");
  const Moments m = std_moments(bounds);
  const double synthetic_variance = m.m2 / static_cast<double>(n1);
  const double verification = m.m1 * m.m1 + (m.m2 * m.m2 + m.m3 * m.m1) / static_cast<double>(n0);
  return synthetic_variance + verification;
}

bool in_one_step_regime(long long n0, long long n1) noexcept { return n1 > n0 && n0 >= 100; }

double long_term_bound_1d(double rho, double initial_sq, std::span<const long long> schedule,
                          std::size_t k, double noise_scale) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::InvalidArgument, "rho must lie in (0, 1)");
  if (schedule.size() < k) throw Error(ErrorKind::InvalidArgument, "schedule shorter than k");
  // Horner-style accumulation: B_{j+1} = rho^2 B_j + rho / n_j.
  double noise = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    noise = rho * rho * noise + rho / static_cast<double>(schedule[j]);
  }
  return std::pow(rho, 2.0 * static_cast<double>(k)) * initial_sq + noise_scale * noise;
}

std::optional<std::size_t> hitting_time(std::span<const double> path, double level,
                                        Crossing direction) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (crossed(path[i], StopRule{level, direction})) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> hitting_time(const Trajectory1D& trajectory, double level,
                                        Crossing direction) {
  const std::vector<double> path = trajectory.means();
  return hitting_time(std::span<const double>(path), level, direction);
}

}  // namespace vretrain
