#include "vretrain/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "vretrain/errors.hpp"

namespace vretrain {

namespace {

using nlohmann::ordered_json;

ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::ofstream open(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  return out;
}

void emit_json(std::ostream& out, const ordered_json& records, const ExperimentConfig& config) {
  ordered_json doc;
  doc["version"] = kVersion;
  doc["config"] = dump_config(config);
  doc["records"] = records;
  out << doc.dump(2) << '\n';
}

template <class Table>
std::filesystem::path write_main(const std::filesystem::path& dir, OutputFormat format,
                                 const ExperimentConfig& config, const Table& table, const std::string& stem) {
  std::filesystem::create_directories(dir);
  write_config(config, dir / "config.yaml");
  const auto path = dir / (stem + (format == OutputFormat::Csv ? ".csv" : ".json"));
  auto out = open(path);
  if (format == OutputFormat::Csv) {
    write_csv(out, table);
  } else {
    write_json(out, table, config);
  }
  return path;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_csv(std::ostream& out, const LandscapeTable& table) {
  out << "delta,r,sigma_c,log_ratio_mean,log_ratio_se,theory_log_ratio,n_reps,status\n";
  for (const auto& c : table.cells) {
    out << format_number(c.delta) << ',' << format_number(c.r) << ',' << format_number(c.sigma_c) << ','
        << format_number(c.log_ratio_mean) << ',' << format_number(c.log_ratio_se) << ','
        << format_number(c.theory_log_ratio) << ',' << c.n_reps << ',' << c.status << '\n';
  }
}

void write_csv(std::ostream& out, const TrajectoryTable& table) {
  out << "arm,round,n_k_per_direction,dist_theta_star_mean,dist_theta_star_se,dist_center_mean,"
         "dist_center_se,theory_bound,rho,n_reps\n";
  for (const auto& r : table.rows) {
    out << to_string(r.arm) << ',' << r.round << ',' << r.n_k_per_direction << ','
        << format_number(r.dist_theta_star.mean) << ',' << format_number(r.dist_theta_star.se) << ','
        << format_number(r.dist_center.mean) << ',' << format_number(r.dist_center.se) << ','
        << format_number(r.theory_bound) << ',' << format_number(r.rho) << ',' << r.dist_center.count << '\n';
  }
}

void write_csv(std::ostream& out, const Gaussian1DTable& table) {
  out << "round,n_k,mean_estimate_mean,mean_estimate_se,dist_midpoint_mean,dist_midpoint_se,theory_bound,n_reps\n";
  for (const auto& r : table.rows) {
    out << r.round << ',' << r.n_k << ',' << format_number(r.mean_estimate.mean) << ','
        << format_number(r.mean_estimate.se) << ',' << format_number(r.dist_midpoint.mean) << ','
        << format_number(r.dist_midpoint.se) << ',' << format_number(r.theory_bound) << ','
        << r.mean_estimate.count << '\n';
  }
}

void write_hitting_csv(std::ostream& out, const Gaussian1DTable& table) {
  out << "replication,hit_round\n";
  for (const auto& h : table.hitting) {
    out << h.replication << ',';
    if (h.round) out << *h.round;
    out << '\n';
  }
}

void write_json(std::ostream& out, const LandscapeTable& table, const ExperimentConfig& config) {
  ordered_json records = ordered_json::array();
  for (const auto& c : table.cells) {
    records.push_back({{"delta", number(c.delta)},
                       {"r", number(c.r)},
                       {"sigma_c", number(c.sigma_c)},
                       {"log_ratio_mean", number(c.log_ratio_mean)},
                       {"log_ratio_se", number(c.log_ratio_se)},
                       {"theory_log_ratio", number(c.theory_log_ratio)},
                       {"n_reps", c.n_reps},
                       {"status", c.status}});
  }
  emit_json(out, records, config);
}

void write_json(std::ostream& out, const TrajectoryTable& table, const ExperimentConfig& config) {
  ordered_json records = ordered_json::array();
  for (const auto& r : table.rows) {
    records.push_back({{"arm", to_string(r.arm)},
                       {"round", r.round},
                       {"n_k_per_direction", r.n_k_per_direction},
                       {"dist_theta_star_mean", number(r.dist_theta_star.mean)},
                       {"dist_theta_star_se", number(r.dist_theta_star.se)},
                       {"dist_center_mean", number(r.dist_center.mean)},
                       {"dist_center_se", number(r.dist_center.se)},
                       {"theory_bound", number(r.theory_bound)},
                       {"rho", number(r.rho)},
                       {"n_reps", r.dist_center.count}});
  }
  emit_json(out, records, config);
}

void write_json(std::ostream& out, const Gaussian1DTable& table, const ExperimentConfig& config) {
  ordered_json records = ordered_json::array();
  for (const auto& r : table.rows) {
    records.push_back({{"round", r.round},
                       {"n_k", r.n_k},
                       {"mean_estimate_mean", number(r.mean_estimate.mean)},
                       {"mean_estimate_se", number(r.mean_estimate.se)},
                       {"dist_midpoint_mean", number(r.dist_midpoint.mean)},
                       {"dist_midpoint_se", number(r.dist_midpoint.se)},
                       {"theory_bound", number(r.theory_bound)},
                       {"n_reps", r.mean_estimate.count}});
  }
  emit_json(out, records, config);
}

std::filesystem::path write_results(const std::filesystem::path& dir, OutputFormat format,
                                    const ExperimentConfig& config, const LandscapeTable& table) {
  return write_main(dir, format, config, table, "landscape");
}

std::filesystem::path write_results(const std::filesystem::path& dir, OutputFormat format,
                                    const ExperimentConfig& config, const TrajectoryTable& table) {
  return write_main(dir, format, config, table, "trajectory");
}

std::filesystem::path write_results(const std::filesystem::path& dir, OutputFormat format,
                                    const ExperimentConfig& config, const Gaussian1DTable& table) {
  const auto path = write_main(dir, format, config, table, "gaussian1d");
  if (!table.hitting.empty()) {
    auto out = open(dir / "hitting.csv");
    write_hitting_csv(out, table);
  }
  return path;
}

}  // namespace vretrain
