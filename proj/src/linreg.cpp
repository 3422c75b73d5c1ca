#include "vretrain/linreg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vretrain/errors.hpp"

namespace vretrain {

namespace {

double rank_threshold(const Eigen::MatrixXd& x, double largest) {
  return static_cast<double>(std::max(x.rows(), x.cols())) * std::numeric_limits<double>::epsilon() *
         largest;
}

}  // namespace

void LinRegConfig::validate() const {
  const Eigen::Index p = dimension();
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
  if (ball.dimension() != p) {
    throw Error(ErrorKind::DimensionMismatch, "verifier centre has dimension " +
                                                  std::to_string(ball.dimension()) + ", expected " +
                                                  std::to_string(p));
  }
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be non-negative");
  if (mode != FilterMode::None && !(sigma > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "filtered retraining needs sigma > 0");
  }
  if (rank_policy == RankPolicy::Strict && n0 < p) {
    throw Error(ErrorKind::InvalidArgument, "n0 must be >= dimension for a full-rank fit");
  }
  if (n0 < 1) throw Error(ErrorKind::InvalidArgument, "n0 must be >= 1");
  if (schedule.size() < rounds) throw Error(ErrorKind::InvalidArgument, "schedule shorter than rounds");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (schedule[k] < 1) throw Error(ErrorKind::InvalidArgument, "schedule counts must be >= 1");
    if (k > 0 && schedule[k] < schedule[k - 1]) {
      throw Error(ErrorKind::InvalidArgument, "schedule must be non-decreasing");
    }
  }
  if (covariates.fixed && (covariates.fixed->rows() != n0 || covariates.fixed->cols() != p)) {
    throw Error(ErrorKind::DimensionMismatch, "fixed design must be n0 x dimension");
  }
}

OlsSolver::OlsSolver(const Eigen::MatrixXd& covariates, RankPolicy policy) : policy_(policy) {
  if (policy == RankPolicy::Strict) {
    qr_.compute(covariates);
    if (covariates.rows() < covariates.cols() || qr_.rank() < covariates.cols()) {
      throw Error(ErrorKind::RankDeficient, "design has rank " + std::to_string(qr_.rank()) + " < " +
                                                std::to_string(covariates.cols()));
    }
  } else {
    cod_.compute(covariates);
  }
}

Eigen::VectorXd OlsSolver::solve(const Eigen::VectorXd& responses) const {
  return policy_ == RankPolicy::Strict ? Eigen::VectorXd(qr_.solve(responses))
                                       : Eigen::VectorXd(cod_.solve(responses));
}

Eigen::VectorXd ols_fit(const Dataset& data, RankPolicy policy) {
  if (data.covariates.rows() != data.responses.size()) {
    throw Error(ErrorKind::DimensionMismatch, "covariate and response row counts differ");
  }
  return OlsSolver(data.covariates, policy).solve(data.responses);
}

SpectralDesign spectral_design(const Eigen::MatrixXd& x0, RankPolicy policy) {
  if (x0.size() == 0) throw Error(ErrorKind::RankDeficient, "empty design");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x0, Eigen::ComputeThinV);
  const Eigen::VectorXd& values = svd.singularValues();
  const double threshold = rank_threshold(x0, values(0));

  Eigen::Index rank = 0;
  while (rank < values.size() && values(rank) > threshold) ++rank;
  if (policy == RankPolicy::Strict && (rank < x0.cols() || x0.rows() < x0.cols())) {
    throw Error(ErrorKind::RankDeficient,
                "design has rank " + std::to_string(rank) + " < " + std::to_string(x0.cols()));
  }
  if (rank == 0) throw Error(ErrorKind::RankDeficient, "design is numerically zero");

  SpectralDesign out;
  out.singular_values = values.head(rank);
  out.directions = svd.matrixV().leftCols(rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    Eigen::Index largest = 0;
    out.directions.col(j).cwiseAbs().maxCoeff(&largest);
    if (out.directions(largest, j) < 0.0) out.directions.col(j) *= -1.0;
  }
  return out;
}

Eigen::MatrixXd draw_covariates(Eigen::Index rows, Eigen::Index cols, RngStream& stream) {
  Eigen::MatrixXd x(rows, cols);
  // Row-major fill so a prefix of rows does not depend on the column count.
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = stream.normal();
  }
  return x;
}

Eigen::VectorXd draw_responses(const Eigen::MatrixXd& covariates, const Eigen::VectorXd& theta,
                               double sigma, RngStream& stream) {
  Eigen::VectorXd y = covariates * theta;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sigma * stream.normal();
  return y;
}

Dataset generate_real_data(const LinRegConfig& config, RngStream& stream) {
  Dataset data;
  data.covariates = config.covariates.fixed ? *config.covariates.fixed
                                            : draw_covariates(config.n0, config.dimension(), stream);
  data.responses = draw_responses(data.covariates, config.true_theta, config.sigma, stream);
  return data;
}

RetrainState retrain_round(const RetrainState& state, const SpectralDesign& design,
                           const LinRegConfig& config, long long count,
                           const ReplicationStreams& streams) {
  if (state.theta_hat.size() != design.ambient_dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "estimate and design differ in dimension");
  }
  RetrainState next;
  next.round = state.round + 1;
  next.theta_hat = Eigen::VectorXd::Zero(state.theta_hat.size());
  for (Eigen::Index j = 0; j < design.rank(); ++j) {
    const Eigen::VectorXd v = design.direction(j);
    RngStream stream = streams.at(next.round, static_cast<std::uint64_t>(j));
    double projected = 0.0;
    try {
      const Interval1D interval = direction_interval(config.ball, v);
      projected = filtered_mean_step(v.dot(state.theta_hat), config.sigma, interval, count,
                                     config.mode, stream);
    } catch (const Error& e) {
      throw Error(e.kind(), "round " + std::to_string(next.round) + ", direction " +
                                std::to_string(j) + ": " + e.what());
    }
    next.theta_hat += projected * v;
  }
  return next;
}

PreparedProblem prepare_problem(const LinRegConfig& config, RngStream& design_stream) {
  config.validate();
  Eigen::MatrixXd x0 = config.covariates.fixed
                           ? *config.covariates.fixed
                           : draw_covariates(config.n0, config.dimension(), design_stream);
  SpectralDesign design = spectral_design(x0, config.rank_policy);
  OlsSolver solver(x0, config.rank_policy);
  return PreparedProblem{config, std::move(x0), std::move(design), std::move(solver)};
}

RetrainTrajectory run_retraining(const PreparedProblem& problem, const ReplicationStreams& streams) {
  const LinRegConfig& config = problem.config;
  const bool filtered = config.mode != FilterMode::None;

  RetrainTrajectory out;
  out.rho = filtered ? contraction_rate(config.ball, config.sigma)
                     : std::numeric_limits<double>::quiet_NaN();
  const double initial_sq =
      expected_initial_sq_to_center(problem.design, config.true_theta, config.ball, config.sigma);

  auto record = [&](const RetrainState& s, long long samples) {
    LinRegRecord r;
    r.round = s.round;
    r.samples_per_direction = samples;
    r.theta_hat = s.theta_hat;
    r.dist_theta_star = (s.theta_hat - config.true_theta).norm();
    r.dist_center = (s.theta_hat - config.ball.center()).norm();
    r.theory_bound = std::numeric_limits<double>::quiet_NaN();
    if (filtered && out.rho < 1.0) {
      r.theory_bound = long_term_bound(config.ball, config.sigma, problem.design.rank(), initial_sq,
                                       config.schedule, s.round);
    }
    return r;
  };

  RngStream real = streams.at(0);
  RetrainState state{problem.solver.solve(draw_responses(problem.covariates, config.true_theta,
                                                         config.sigma, real)),
                     0};
  out.records.reserve(config.rounds + 1);
  out.records.push_back(record(state, 0));
  for (std::size_t k = 0; k < config.rounds; ++k) {
    state = retrain_round(state, problem.design, config, config.schedule[k], streams);
    out.records.push_back(record(state, config.schedule[k]));
  }
  return out;
}

double baseline_mse(const SpectralDesign& design, double sigma) {
  return sigma * sigma * design.singular_values.array().square().inverse().sum();
}

OneStepTerms one_step_terms(const SpectralDesign& design, const Eigen::VectorXd& true_theta,
                            const KnowledgeBall& ball, double sigma, long long n1) {
  if (n1 < 1) throw Error(ErrorKind::InvalidArgument, "n1 must be >= 1");
  OneStepTerms terms;
  for (Eigen::Index j = 0; j < design.rank(); ++j) {
    const Moments m = std_moments(direction_bounds(ball, design.direction(j), true_theta, sigma));
    const double mu_sq = design.singular_values(j) * design.singular_values(j);
    terms.synthetic_variance += m.m2 / static_cast<double>(n1);
    terms.verification += m.m1 * m.m1 + (m.m1 * m.m3 + m.m2 * m.m2) / mu_sq;
  }
  terms.synthetic_variance *= sigma * sigma;
  terms.verification *= sigma * sigma;
  return terms;
}

double one_step_prediction(const SpectralDesign& design, const Eigen::VectorXd& true_theta,
                           const KnowledgeBall& ball, double sigma, long long n1) {
  return one_step_terms(design, true_theta, ball, sigma, n1).total();
}

double long_term_bound(const KnowledgeBall& ball, double sigma, Eigen::Index p, double initial_sq,
                       std::span<const long long> schedule, std::size_t k) {
  const double rho = contraction_rate(ball, sigma);
  return long_term_bound_1d(rho, initial_sq, schedule, k,
                            static_cast<double>(p) * sigma * sigma);
}

double expected_initial_sq_to_center(const SpectralDesign& design, const Eigen::VectorXd& true_theta,
                                     const KnowledgeBall& ball, double sigma) {
  return (true_theta - ball.center()).squaredNorm() + baseline_mse(design, sigma);
}

Eigen::VectorXd random_unit_vector(Eigen::Index p, RngStream& stream) {
  for (;;) {
    Eigen::VectorXd u(p);
    for (Eigen::Index i = 0; i < p; ++i) u(i) = stream.normal();
    const double norm = u.norm();
    if (norm > 0.0) return u / norm;
  }
}

}  // namespace vretrain
