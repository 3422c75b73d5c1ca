#include "vretrain/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "vretrain/errors.hpp"

namespace vretrain {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t worker_count(std::size_t requested, std::size_t tasks) {
  std::size_t n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return std::max<std::size_t>(1, std::min(n, tasks));
}

void require_kind(const ExperimentConfig& config, std::initializer_list<ExperimentKind> kinds) {
  validate_config(config);
  if (std::find(kinds.begin(), kinds.end(), config.kind) == kinds.end()) {
    throw Error(ErrorKind::ConfigError, "experiment kind '" + to_string(config.kind) + "' not valid here");
  }
}

// log(mean a / mean b) with a delta-method standard error.
Summary log_ratio_of_means(std::span<const double> a, std::span<const double> b) {
  const Summary sa = summarize(a);
  const Summary sb = summarize(b);
  const std::size_t n = a.size();
  double cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) cov += (a[i] - sa.mean) * (b[i] - sb.mean);
  cov = n > 1 ? cov / static_cast<double>(n - 1) / static_cast<double>(n) : 0.0;
  const double va = sa.se * sa.se / (sa.mean * sa.mean);
  const double vb = sb.se * sb.se / (sb.mean * sb.mean);
  const double var = std::max(0.0, va + vb - 2.0 * cov / (sa.mean * sb.mean));
  return {std::log(sa.mean / sb.mean), std::sqrt(var), n};
}

}  // namespace

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return {kNaN, kNaN, 0};
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  s.se = sd / std::sqrt(static_cast<double>(values.size()));
  return s;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task) {
  if (count == 0) return;
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = worker_count(threads, count);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

LandscapeTable landscape_theory(const ExperimentConfig& config) {
  require_kind(config, {ExperimentKind::Landscape});
  LandscapeTable table;
  for (double delta : config.grid->bias) {
    for (double r : config.grid->radius) {
      LandscapeCell cell;
      cell.delta = delta;
      cell.r = r;
      cell.sigma_c = resolved_slack(config);
      cell.log_ratio_mean = cell.log_ratio_se = kNaN;
      cell.n_reps = 0;
      try {
        const LinRegConfig lr = build_linreg_config(config, delta, r);
        RngStream design_stream = experiment_stream(config, kDesignPurpose);
        const PreparedProblem problem = prepare_problem(lr, design_stream);
        const double baseline = baseline_mse(problem.design, lr.sigma);
        const double predicted =
            one_step_prediction(problem.design, lr.true_theta, lr.ball, lr.sigma, lr.schedule.front());
        cell.theory_log_ratio = 0.5 * std::log(baseline / predicted);
      } catch (const Error& e) {
        cell.theory_log_ratio = kNaN;
        cell.status = to_string(e.kind());
      }
      table.cells.push_back(cell);
    }
  }
  return table;
}

LandscapeTable run_landscape(const ExperimentConfig& config, const RunOptions& options) {
  LandscapeTable table = landscape_theory(config);
  const std::size_t reps = config.replications;
  const std::size_t cells = table.cells.size();

  std::vector<std::optional<PreparedProblem>> problems(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    if (!table.cells[c].ok()) continue;
    const LinRegConfig lr = build_linreg_config(config, table.cells[c].delta, table.cells[c].r);
    RngStream design_stream = experiment_stream(config, kDesignPurpose);
    problems[c].emplace(prepare_problem(lr, design_stream));
  }

  std::vector<double> before(cells * reps, kNaN);
  std::vector<double> after(cells * reps, kNaN);
  std::vector<std::optional<ErrorKind>> failures(cells * reps);
  parallel_for(cells * reps, options.threads, [&](std::size_t task) {
    const std::size_t c = task / reps;
    const std::size_t rep = task % reps;
    if (!problems[c]) return;
    const PreparedProblem& problem = *problems[c];
    const LinRegConfig& lr = problem.config;
    const ReplicationStreams streams(config.master_seed, rep);
    try {
      RngStream real = streams.at(0);
      const RetrainState start{
          problem.solver.solve(draw_responses(problem.covariates, lr.true_theta, lr.sigma, real)), 0};
      const RetrainState next = retrain_round(start, problem.design, lr, lr.schedule.front(), streams);
      before[task] = (start.theta_hat - lr.true_theta).norm();
      after[task] = (next.theta_hat - lr.true_theta).norm();
    } catch (const Error& e) {
      failures[task] = e.kind();
    }
  });

  for (std::size_t c = 0; c < cells; ++c) {
    LandscapeCell& cell = table.cells[c];
    if (!problems[c]) continue;
    const auto first_failure =
        std::find_if(failures.begin() + static_cast<std::ptrdiff_t>(c * reps),
                     failures.begin() + static_cast<std::ptrdiff_t>((c + 1) * reps),
                     [](const auto& f) { return f.has_value(); });
    if (first_failure != failures.begin() + static_cast<std::ptrdiff_t>((c + 1) * reps)) {
      cell.status = to_string(**first_failure);
      continue;
    }
    const std::span<const double> b(before.data() + c * reps, reps);
    const std::span<const double> a(after.data() + c * reps, reps);
    Summary s;
    if (config.grid->log_ratio == LogRatioMode::PerTrial) {
      std::vector<double> logs(reps);
      for (std::size_t i = 0; i < reps; ++i) logs[i] = std::log(b[i] / a[i]);
      s = summarize(logs);
    } else {
      s = log_ratio_of_means(b, a);
    }
    cell.log_ratio_mean = s.mean;
    cell.log_ratio_se = s.se;
    cell.n_reps = reps;
  }
  return table;
}

std::vector<TrajectoryRow> TrajectoryTable::arm(Arm which) const {
  std::vector<TrajectoryRow> out;
  for (const auto& row : rows) {
    if (row.arm == which) out.push_back(row);
  }
  return out;
}

TrajectoryTable run_iterative(const ExperimentConfig& config, const RunOptions& options) {
  require_kind(config, {ExperimentKind::IterateLinReg});
  const std::size_t reps = config.replications;
  TrajectoryTable table;

  for (Arm arm : config.arms) {
    const LinRegConfig lr =
        build_linreg_config(config, config.verifier.bias.value_or(0.0), config.verifier.radius, arm);
    RngStream design_stream = experiment_stream(config, kDesignPurpose);
    const PreparedProblem problem = prepare_problem(lr, design_stream);

    std::vector<RetrainTrajectory> runs(reps);
    parallel_for(reps, options.threads, [&](std::size_t rep) {
      runs[rep] = run_retraining(problem, ReplicationStreams(config.master_seed, rep));
    });

    const std::size_t rounds = runs.front().records.size();
    std::vector<double> d_star(reps), d_center(reps), sq_star(reps), sq_center(reps);
    for (std::size_t k = 0; k < rounds; ++k) {
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const LinRegRecord& rec = runs[rep].records[k];
        d_star[rep] = rec.dist_theta_star;
        d_center[rep] = rec.dist_center;
        sq_star[rep] = rec.dist_theta_star * rec.dist_theta_star;
        sq_center[rep] = rec.dist_center * rec.dist_center;
      }
      TrajectoryRow row;
      row.arm = arm;
      row.round = k;
      row.n_k_per_direction = runs.front().records[k].samples_per_direction;
      row.dist_theta_star = summarize(d_star);
      row.dist_center = summarize(d_center);
      row.sq_dist_theta_star = summarize(sq_star);
      row.sq_dist_center = summarize(sq_center);
      row.theory_bound = runs.front().records[k].theory_bound;
      row.rho = runs.front().rho;
      table.rows.push_back(row);
    }
  }
  return table;
}

double Gaussian1DTable::hit_fraction() const {
  if (hitting.empty()) return kNaN;
  const auto hits = std::count_if(hitting.begin(), hitting.end(), [](const auto& h) { return h.round.has_value(); });
  return static_cast<double>(hits) / static_cast<double>(hitting.size());
}

Gaussian1DTable run_gaussian1d(const ExperimentConfig& config, const RunOptions& options) {
  require_kind(config, {ExperimentKind::Iterate1D});
  const Gaussian1DConfig g = build_gaussian1d_config(config);
  g.validate();
  const std::size_t reps = config.replications;

  std::vector<Trajectory1D> runs(reps);
  parallel_for(reps, options.threads, [&](std::size_t rep) {
    runs[rep] = run_iterations(g, ReplicationStreams(config.master_seed, rep));
  });

  Gaussian1DTable table;
  const bool bounded = g.interval.finite();
  table.rho = bounded ? contraction_rate_from_half_width(0.5 * (g.interval.upper - g.interval.lower) / g.sigma)
                      : kNaN;
  const double mid = g.interval.midpoint();
  const double initial_sq =
      bounded ? (g.true_mean - mid) * (g.true_mean - mid) + g.sigma * g.sigma / static_cast<double>(g.n0) : kNaN;

  std::vector<double> means(reps), dist(reps), sq(reps);
  for (std::size_t k = 0; k <= g.rounds; ++k) {
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const Record1D& rec = runs[rep].records[k];
      means[rep] = rec.mean_estimate;
      dist[rep] = rec.dist_midpoint;
      sq[rep] = rec.dist_midpoint * rec.dist_midpoint;
    }
    Gaussian1DRow row;
    row.round = k;
    row.n_k = runs.front().records[k].samples;
    row.mean_estimate = summarize(means);
    row.dist_midpoint = bounded ? summarize(dist) : Summary{kNaN, kNaN, reps};
    row.sq_dist_midpoint = bounded ? summarize(sq) : Summary{kNaN, kNaN, reps};
    row.theory_bound = kNaN;
    if (bounded && table.rho < 1.0) {
      row.theory_bound =
          g.sigma * g.sigma *
          long_term_bound_1d(table.rho, initial_sq / (g.sigma * g.sigma), g.schedule, k);
    }
    table.rows.push_back(row);
  }

  if (config.interval->hitting_level) {
    for (std::size_t rep = 0; rep < reps; ++rep) {
      table.hitting.push_back(
          {rep, hitting_time(runs[rep], *config.interval->hitting_level, config.interval->hitting_direction)});
    }
  }
  return table;
}

double estimate_contraction(std::span<const double> mean_sq, std::size_t burn_in, std::size_t window) {
  if (mean_sq.size() < burn_in + 10) {
    throw Error(ErrorKind::InsufficientRounds, "need at least 10 rounds after burn-in, have " +
                                                   std::to_string(mean_sq.size() > burn_in ? mean_sq.size() - burn_in : 0));
  }
  std::size_t end = window == 0 ? mean_sq.size() : std::min(mean_sq.size(), burn_in + window);
  if (end - burn_in < 10) throw Error(ErrorKind::InsufficientRounds, "window shorter than 10 rounds");

  const double n = static_cast<double>(end - burn_in);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = burn_in; k < end; ++k) {
    if (!(mean_sq[k] > 0.0) || !std::isfinite(mean_sq[k])) {
      throw Error(ErrorKind::InvalidArgument, "squared distances must be positive and finite");
    }
    const double x = static_cast<double>(k);
    const double y = std::log(mean_sq[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return std::exp(0.5 * slope);
}

std::vector<double> mean_sq_dist_center(const TrajectoryTable& table, Arm arm) {
  std::vector<double> out;
  for (const auto& row : table.arm(arm)) out.push_back(row.sq_dist_center.mean);
  return out;
}

}  // namespace vretrain
