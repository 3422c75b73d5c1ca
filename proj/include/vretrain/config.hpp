#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vretrain/gaussian1d.hpp"
#include "vretrain/linreg.hpp"
#include "vretrain/schedule.hpp"

namespace vretrain {

enum class ExperimentKind { Landscape, IterateLinReg, Iterate1D };

enum class LogRatioMode { PerTrial, OfMeans };

enum class Arm { Filtered, None };

struct ProblemSection {
  std::optional<long long> dimension;
  /// Either one value (broadcast to every coordinate) or `dimension` values.
  std::vector<double> true_theta;
  double sigma = 1.0;
  long long n0 = 1;
  FilterMode filter_mode = FilterMode::Direct;
  /// Row-major n0 x dimension matrix; present iff covariates are fixed.
  std::optional<std::vector<std::vector<double>>> design_matrix;
  RankPolicy rank_policy = RankPolicy::Strict;

  bool operator==(const ProblemSection&) const = default;
};

struct VerifierSection {
  double radius = 0.0;
  /// Absent: sqrt(2/pi) * sigma.
  std::optional<double> slack;
  /// |theta* - centre|; centre = theta* + bias * u for a random unit u.
  std::optional<double> bias;
  std::optional<std::vector<double>> center;

  bool operator==(const VerifierSection&) const = default;
};

struct IntervalSection {
  double true_mean = 0.0;
  double lower = -kInfinity;
  double upper = kInfinity;
  std::optional<double> hitting_level;
  Crossing hitting_direction = Crossing::Down;

  bool operator==(const IntervalSection&) const = default;
};

struct GridSection {
  std::vector<double> bias;
  std::vector<double> radius;
  LogRatioMode log_ratio = LogRatioMode::PerTrial;

  bool operator==(const GridSection&) const = default;
};

/// Declarative description of one experiment, loaded from a YAML file.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::IterateLinReg;
  std::size_t replications = 1;
  std::uint64_t master_seed = 0;
  ProblemSection problem;
  VerifierSection verifier;
  Schedule schedule;
  std::vector<Arm> arms{Arm::Filtered};
  std::optional<IntervalSection> interval;
  std::optional<GridSection> grid;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses YAML text. Unknown keys, wrong types and missing required keys
/// raise Error{ConfigError} naming the key and its line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Semantic checks beyond the schema (kind-specific sections, grid
/// non-empty, replications >= 1, schedule expands). Throws Error{ConfigError}.
void validate_config(const ExperimentConfig& config);

/// YAML text that parse_config maps back to an equal config.
std::string dump_config(const ExperimentConfig& config);
void write_config(const ExperimentConfig& config, const std::filesystem::path& path);

std::string to_string(ExperimentKind kind);
std::string to_string(FilterMode mode);
std::string to_string(Arm arm);

/// The verifier slack after applying the documented default.
double resolved_slack(const ExperimentConfig& config);

/// theta* expanded to the problem dimension.
Eigen::VectorXd resolved_true_theta(const ExperimentConfig& config);

/// Experiment-wide random unit vector (used for the bias offset).
Eigen::VectorXd offset_direction(const ExperimentConfig& config);

/// Verifier centre: explicit centre, or theta* + bias * offset_direction.
Eigen::VectorXd resolved_center(const ExperimentConfig& config, double bias);

/// Linear-regression config for one verifier setting and arm.
LinRegConfig build_linreg_config(const ExperimentConfig& config, double bias, double radius,
                                 Arm arm = Arm::Filtered);

Gaussian1DConfig build_gaussian1d_config(const ExperimentConfig& config);

/// Stream that draws experiment-wide randomness (design, offset direction).
RngStream experiment_stream(const ExperimentConfig& config, std::uint64_t purpose);

inline constexpr std::uint64_t kDesignPurpose = 0;
inline constexpr std::uint64_t kOffsetPurpose = 1;

}  // namespace vretrain
