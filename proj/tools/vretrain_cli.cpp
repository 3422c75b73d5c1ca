#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "vretrain/config.hpp"
#include "vretrain/errors.hpp"
#include "vretrain/experiments.hpp"
#include "vretrain/output.hpp"

using namespace vretrain;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::string out_dir = "results";
  std::size_t threads = 0;
  std::string format = "csv";
};

ExperimentConfig load(const GlobalOptions& g) {
  ExperimentConfig config = load_config(g.config_path);
  if (g.seed) config.master_seed = *g.seed;
  if (g.reps) config.replications = *g.reps;
  validate_config(config);
  return config;
}

void expect_kind(const ExperimentConfig& config, ExperimentKind kind, const std::string& command) {
  if (config.kind != kind) {
    throw Error(ErrorKind::ConfigError, "'" + command + "' needs experiment: " + to_string(kind) + ", config has " +
                                            to_string(config.kind));
  }
}

OutputFormat parse_format(const std::string& f) { return f == "json" ? OutputFormat::Json : OutputFormat::Csv; }

void print_theory(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::Landscape:
      write_csv(std::cout, landscape_theory(config));
      return;
    case ExperimentKind::IterateLinReg: {
      const LinRegConfig lr =
          build_linreg_config(config, config.verifier.bias.value_or(0.0), config.verifier.radius);
      RngStream design_stream = experiment_stream(config, kDesignPurpose);
      const PreparedProblem problem = prepare_problem(lr, design_stream);
      const double rho = contraction_rate(lr.ball, lr.sigma);
      const double initial_sq = expected_initial_sq_to_center(problem.design, lr.true_theta, lr.ball, lr.sigma);
      const OneStepTerms terms =
          one_step_terms(problem.design, lr.true_theta, lr.ball, lr.sigma, lr.schedule.front());
      std::cout << "rho," << format_number(rho) << '\n'
                << "baseline_mse," << format_number(baseline_mse(problem.design, lr.sigma)) << '\n'
                << "one_step_synthetic_variance," << format_number(terms.synthetic_variance) << '\n'
                << "one_step_verification," << format_number(terms.verification) << '\n'
                << "one_step_prediction," << format_number(terms.total()) << '\n';
      std::cout << "round,n_k_per_direction,theory_bound\n";
      for (std::size_t k = 0; k <= lr.rounds; ++k) {
        const double bound = rho < 1.0 ? long_term_bound(lr.ball, lr.sigma, problem.design.rank(), initial_sq,
                                                         lr.schedule, k)
                                       : std::numeric_limits<double>::quiet_NaN();
        std::cout << k << ',' << (k == 0 ? 0 : lr.schedule[k - 1]) << ',' << format_number(bound) << '\n';
      }
      return;
    }
    case ExperimentKind::Iterate1D: {
      const Gaussian1DConfig g = build_gaussian1d_config(config);
      const Bounds bounds = interval_bounds_1d(g.interval, g.true_mean, g.sigma);
      if (!g.schedule.empty()) {
        if (!in_one_step_regime(g.n0, g.schedule.front())) {
          std::cerr << "warning: one-step prediction is outside the n1 > n0 >= 100 regime\n";
        }
        std::cout << "one_step_mse," << format_number(g.sigma * g.sigma *
                                                       one_step_mse_prediction_1d(bounds, g.n0, g.schedule.front()))
                  << '\n';
      }
      if (!g.interval.finite()) {
        std::cout << "rho,\n";
        return;
      }
      const double rho = contraction_rate_from_half_width(0.5 * (g.interval.upper - g.interval.lower) / g.sigma);
      const double mid = g.interval.midpoint();
      const double init = ((g.true_mean - mid) * (g.true_mean - mid)) / (g.sigma * g.sigma) + 1.0 / static_cast<double>(g.n0);
      std::cout << "rho," << format_number(rho) << '\n' << "round,n_k,theory_bound\n";
      for (std::size_t k = 0; k <= g.rounds; ++k) {
        std::cout << k << ',' << (k == 0 ? g.n0 : g.schedule[k - 1]) << ','
                  << format_number(g.sigma * g.sigma * long_term_bound_1d(rho, init, g.schedule, k)) << '\n';
      }
      return;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifier-filtered synthetic retraining experiments"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "Experiment YAML file")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Override master_seed");
  app.add_option("--reps", g.reps, "Override replications")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out_dir, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  auto* landscape = app.add_subcommand("landscape", "One-step error-reduction landscape");
  auto* iterate = app.add_subcommand("iterate", "Iterative linear-regression retraining");
  auto* gaussian1d = app.add_subcommand("gaussian1d", "Iterative 1-D Gaussian retraining");
  auto* theory = app.add_subcommand("theory", "Closed-form predictions, no simulation");
  auto* validate = app.add_subcommand("validate", "Check a config and exit");
  for (auto* sub : {landscape, iterate, gaussian1d, theory, validate}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig config = load(g);
    const RunOptions run{g.threads};
    const OutputFormat format = parse_format(g.format);
    std::filesystem::path written;

    if (*validate) {
      std::cout << "ok: " << to_string(config.kind) << ", " << config.replications << " replications\n";
    } else if (*theory) {
      print_theory(config);
    } else if (*landscape) {
      expect_kind(config, ExperimentKind::Landscape, "landscape");
      written = write_results(g.out_dir, format, config, run_landscape(config, run));
    } else if (*iterate) {
      expect_kind(config, ExperimentKind::IterateLinReg, "iterate");
      written = write_results(g.out_dir, format, config, run_iterative(config, run));
    } else if (*gaussian1d) {
      expect_kind(config, ExperimentKind::Iterate1D, "gaussian1d");
      const Gaussian1DTable table = run_gaussian1d(config, run);
      written = write_results(g.out_dir, format, config, table);
      if (!table.hitting.empty()) std::cerr << "hit fraction: " << table.hit_fraction() << '\n';
    }
    if (!written.empty()) std::cerr << "wrote " << written.string() << '\n';
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
