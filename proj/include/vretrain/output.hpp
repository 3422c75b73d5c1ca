#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "vretrain/experiments.hpp"

namespace vretrain {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest round-trippable decimal ("%.17g"); NaN prints as an empty field.
std::string format_number(double value);

void write_csv(std::ostream& out, const LandscapeTable& table);
void write_csv(std::ostream& out, const TrajectoryTable& table);
void write_csv(std::ostream& out, const Gaussian1DTable& table);
/// replication, hit_round (empty when the level was never reached).
void write_hitting_csv(std::ostream& out, const Gaussian1DTable& table);

/// {"version", "config", "records"} where records mirror the CSV rows; NaN
/// becomes null.
void write_json(std::ostream& out, const LandscapeTable& table, const ExperimentConfig& config);
void write_json(std::ostream& out, const TrajectoryTable& table, const ExperimentConfig& config);
void write_json(std::ostream& out, const Gaussian1DTable& table, const ExperimentConfig& config);

enum class OutputFormat { Csv, Json };

/// Writes <dir>/landscape.{csv,json} (or trajectory, gaussian1d plus
/// hitting.csv) and <dir>/config.yaml. Returns the main output path.
std::filesystem::path write_results(const std::filesystem::path& dir, OutputFormat format,
                                    const ExperimentConfig& config, const LandscapeTable& table);
std::filesystem::path write_results(const std::filesystem::path& dir, OutputFormat format,
                                    const ExperimentConfig& config, const TrajectoryTable& table);
std::filesystem::path write_results(const std::filesystem::path& dir, OutputFormat format,
                                    const ExperimentConfig& config, const Gaussian1DTable& table);

}  // namespace vretrain
