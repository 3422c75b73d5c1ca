#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vretrain/rng.hpp"
#include "vretrain/truncnorm.hpp"
#include "vretrain/verifier.hpp"

namespace vretrain {

/// How synthetic samples are filtered.
///  - Direct: draw exactly n samples from the truncated law.
///  - Reject: generate from the untruncated model and keep accepted samples
///    until n are retained (at most kMaxAttemptsPerSample tries each).
///  - None: no verifier; plain synthetic mean.
enum class FilterMode { Direct, Reject, None };

inline constexpr std::uint64_t kMaxAttemptsPerSample = 1'000'000;

/// Substreams of one replication, keyed by (round, direction).
class ReplicationStreams {
 public:
  ReplicationStreams(std::uint64_t master_seed, std::uint64_t replication)
      : seed_(master_seed), replication_(replication) {}

  RngStream at(std::uint64_t round, std::uint64_t direction = 0) const {
    return derive_stream(seed_, replication_, round, direction);
  }

  std::uint64_t replication() const noexcept { return replication_; }

 private:
  std::uint64_t seed_;
  std::uint64_t replication_;
};

struct Gaussian1DConfig {
  double true_mean = 0.0;
  double sigma = 1.0;
  Interval1D interval{-kInfinity, kInfinity};
  long long n0 = 1;
  /// schedule[k] verified samples produce round k+1 from round k.
  std::vector<long long> schedule;
  std::size_t rounds = 0;
  FilterMode mode = FilterMode::Direct;

  /// Throws Error{InvalidArgument} on n0 < 1, sigma <= 0, a short or
  /// decreasing schedule, or non-positive counts.
  void validate() const;
};

struct Record1D {
  std::size_t round = 0;
  double mean_estimate = 0.0;
  /// (mean_estimate - true_mean) / sigma.
  double standardized_error = 0.0;
  /// |mean_estimate - midpoint|; NaN when the interval is unbounded.
  double dist_midpoint = 0.0;
  /// Samples behind this estimate (n0 for round 0).
  long long samples = 0;
};

struct Trajectory1D {
  std::vector<Record1D> records;

  std::vector<double> means() const;
};

enum class Crossing { Down, Up };

/// Stop a run as soon as the estimate crosses `level`.
struct StopRule {
  double level = 0.0;
  Crossing direction = Crossing::Down;
};

/// Mean of n0 draws from N(true_mean, sigma^2).
double initial_mean(const Gaussian1DConfig& config, RngStream& stream);

/// One filtered synthetic-mean update starting from `current_mean`. This is
/// the shared 1-D kernel; linear-regression rounds call it per direction.
double filtered_mean_step(double current_mean, double sigma, const Interval1D& interval,
                          long long count, FilterMode mode, RngStream& stream);

double retrain_step(double current_mean, const Gaussian1DConfig& config, long long count,
                    RngStream& stream);

/// Round 0 from stream (replication, 0, 0); round k+1 from (replication, k+1, 0).
/// With a stop rule the trajectory ends at the first crossing.
Trajectory1D run_iterations(const Gaussian1DConfig& config, const ReplicationStreams& streams,
                            std::optional<StopRule> stop = std::nullopt);

/// x + m1(lower - x, upper - x): the noiseless standardized update.
double deterministic_map(const Bounds& bounds, double x);

/// Truncated variance m2(lower - x, upper - x), the derivative of
/// deterministic_map.
double map_slope(const Bounds& bounds, double x);

/// Synthetic variance plus verification bias+variance, in units of sigma^2:
/// m2/n1 + m1^2 + (m2^2 + m3*m1)/n0.
double one_step_mse_prediction_1d(const Bounds& bounds, long long n0, long long n1);

/// The one-step approximation is proved for n1 > n0 >= 100; outside that
/// range it is still computed but callers should flag it.
bool in_one_step_regime(long long n0, long long n1) noexcept;

/// rho^(2k) * initial_sq + noise_scale * sum_{j<k} rho^(2(k-j)-1) / n_j.
/// noise_scale is 1 in standardized units.
double long_term_bound_1d(double rho, double initial_sq, std::span<const long long> schedule,
                          std::size_t k, double noise_scale = 1.0);

/// First index whose value is at or beyond `level` in the given direction.
std::optional<std::size_t> hitting_time(std::span<const double> path, double level,
                                        Crossing direction);
std::optional<std::size_t> hitting_time(const Trajectory1D& trajectory, double level,
                                        Crossing direction);

}  // namespace vretrain
