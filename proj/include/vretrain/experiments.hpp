#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vretrain/config.hpp"

namespace vretrain {

/// Sample mean and its standard error (sample sd / sqrt(n)); se is 0 for n = 1.
struct Summary {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

struct RunOptions {
  /// Worker threads; 0 means hardware concurrency.
  std::size_t threads = 1;
};

/// Runs task(i) for i in [0, count) on a pool of workers. Results must be
/// written to slot i by the task, so output order never depends on timing.
/// The first exception (by index) is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task);

struct LandscapeCell {
  double delta = 0.0;
  double r = 0.0;
  double sigma_c = 0.0;
  double log_ratio_mean = 0.0;
  double log_ratio_se = 0.0;
  double theory_log_ratio = 0.0;
  std::size_t n_reps = 0;
  /// "ok", or the error kind that made the cell unusable.
  std::string status = "ok";

  bool ok() const noexcept { return status == "ok"; }
};

struct LandscapeTable {
  std::vector<LandscapeCell> cells;
};

/// One generate-verify-retrain round per replication for every (bias, radius)
/// grid cell, using the first schedule entry as n1. All cells share the same
/// design and per-replication streams.
LandscapeTable run_landscape(const ExperimentConfig& config, const RunOptions& options = {});

/// Closed-form log-ratio for every grid cell, without simulation.
LandscapeTable landscape_theory(const ExperimentConfig& config);

struct TrajectoryRow {
  Arm arm = Arm::Filtered;
  std::size_t round = 0;
  long long n_k_per_direction = 0;
  Summary dist_theta_star;
  Summary dist_center;
  Summary sq_dist_theta_star;
  Summary sq_dist_center;
  /// NaN when not applicable (unfiltered arm).
  double theory_bound = 0.0;
  double rho = 0.0;
};

struct TrajectoryTable {
  std::vector<TrajectoryRow> rows;

  /// Rows of one arm in round order.
  std::vector<TrajectoryRow> arm(Arm which) const;
};

TrajectoryTable run_iterative(const ExperimentConfig& config, const RunOptions& options = {});

struct Gaussian1DRow {
  std::size_t round = 0;
  long long n_k = 0;
  Summary mean_estimate;
  Summary dist_midpoint;
  Summary sq_dist_midpoint;
  /// Bound on E(mean - midpoint)^2; NaN for unbounded intervals.
  double theory_bound = 0.0;
};

struct HittingRecord {
  std::size_t replication = 0;
  std::optional<std::size_t> round;
};

struct Gaussian1DTable {
  std::vector<Gaussian1DRow> rows;
  /// Filled when the config sets a hitting level.
  std::vector<HittingRecord> hitting;
  double rho = 0.0;

  double hit_fraction() const;
};

Gaussian1DTable run_gaussian1d(const ExperimentConfig& config, const RunOptions& options = {});

/// exp(slope / 2) of a least-squares fit of log(mean_sq[k]) against k over
/// k in [burn_in, burn_in + window) (window 0: to the end). Needs at least
/// 10 rounds after burn-in; throws Error{InsufficientRounds} otherwise and
/// Error{InvalidArgument} on non-positive values.
double estimate_contraction(std::span<const double> mean_sq, std::size_t burn_in = 0,
                            std::size_t window = 0);

/// Mean squared distance to the centre per round for one arm.
std::vector<double> mean_sq_dist_center(const TrajectoryTable& table, Arm arm = Arm::Filtered);

}  // namespace vretrain
