#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "vretrain/gaussian1d.hpp"
#include "vretrain/rng.hpp"
#include "vretrain/verifier.hpp"

namespace vretrain {

struct Dataset {
  Eigen::MatrixXd covariates;
  Eigen::VectorXd responses;
};

/// Strict rejects rank-deficient designs; Subspace works in the row space
/// of X0 (minimum-norm OLS, directions restricted to non-zero singular values).
enum class RankPolicy { Strict, Subspace };

/// Singular values (descending) and right singular vectors (columns) of X0.
/// Each direction is sign-fixed so its largest-magnitude entry is positive.
struct SpectralDesign {
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd directions;

  Eigen::Index ambient_dimension() const noexcept { return directions.rows(); }
  Eigen::Index rank() const noexcept { return directions.cols(); }
  Eigen::VectorXd direction(Eigen::Index j) const { return directions.col(j); }
};

/// Least squares via column-pivoted Householder QR, reusable across
/// response vectors for a fixed design.
class OlsSolver {
 public:
  explicit OlsSolver(const Eigen::MatrixXd& covariates, RankPolicy policy = RankPolicy::Strict);

  Eigen::VectorXd solve(const Eigen::VectorXd& responses) const;

 private:
  RankPolicy policy_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_;
};

Eigen::VectorXd ols_fit(const Dataset& data, RankPolicy policy = RankPolicy::Strict);

SpectralDesign spectral_design(const Eigen::MatrixXd& x0, RankPolicy policy = RankPolicy::Strict);

struct CovariateLaw {
  /// Empty: i.i.d. standard normal entries. Otherwise this exact matrix.
  std::optional<Eigen::MatrixXd> fixed;
};

struct LinRegConfig {
  Eigen::VectorXd true_theta;
  KnowledgeBall ball;
  double sigma = 1.0;
  long long n0 = 1;
  /// Per-direction verified counts; entry k produces round k+1.
  std::vector<long long> schedule;
  std::size_t rounds = 0;
  CovariateLaw covariates;
  FilterMode mode = FilterMode::Direct;
  RankPolicy rank_policy = RankPolicy::Strict;

  Eigen::Index dimension() const noexcept { return true_theta.size(); }
  void validate() const;
};

struct RetrainState {
  Eigen::VectorXd theta_hat;
  std::size_t round = 0;
};

Eigen::MatrixXd draw_covariates(Eigen::Index rows, Eigen::Index cols, RngStream& stream);

/// Responses Y = X theta + sigma * xi for a given design.
Eigen::VectorXd draw_responses(const Eigen::MatrixXd& covariates, const Eigen::VectorXd& theta,
                               double sigma, RngStream& stream);

/// Covariates from the configured law, then responses, from one stream.
Dataset generate_real_data(const LinRegConfig& config, RngStream& stream);

/// One generate-verify-retrain round over all directions. Direction j of
/// round k+1 draws from streams.at(k+1, j) and is updated by the 1-D kernel
/// filtered_mean_step on the verifier's interval along v_j.
RetrainState retrain_round(const RetrainState& state, const SpectralDesign& design,
                           const LinRegConfig& config, long long count,
                           const ReplicationStreams& streams);

struct LinRegRecord {
  std::size_t round = 0;
  long long samples_per_direction = 0;
  Eigen::VectorXd theta_hat;
  double dist_theta_star = 0.0;
  double dist_center = 0.0;
  /// Long-term bound on E|theta_hat - center|^2 at this round; NaN for the
  /// unfiltered baseline.
  double theory_bound = 0.0;
};

struct RetrainTrajectory {
  std::vector<LinRegRecord> records;
  double rho = 0.0;
};

/// Experiment-level pieces shared by every replication: the real design,
/// its factorisation and spectral directions.
struct PreparedProblem {
  LinRegConfig config;
  Eigen::MatrixXd covariates;
  SpectralDesign design;
  OlsSolver solver;
};

/// Draws (or takes) X0 once using `design_stream` and factorises it.
PreparedProblem prepare_problem(const LinRegConfig& config, RngStream& design_stream);

/// Real responses from streams.at(0), then config.rounds retraining rounds.
RetrainTrajectory run_retraining(const PreparedProblem& problem, const ReplicationStreams& streams);

/// sigma^2 * sum_j mu_j^-2.
double baseline_mse(const SpectralDesign& design, double sigma);

struct OneStepTerms {
  double synthetic_variance = 0.0;
  double verification = 0.0;
  double total() const noexcept { return synthetic_variance + verification; }
};

/// Per-direction one-step MSE terms with moments at the verifier's bounds
/// around the true parameter, summed and scaled by sigma^2.
OneStepTerms one_step_terms(const SpectralDesign& design, const Eigen::VectorXd& true_theta,
                            const KnowledgeBall& ball, double sigma, long long n1);

double one_step_prediction(const SpectralDesign& design, const Eigen::VectorXd& true_theta,
                           const KnowledgeBall& ball, double sigma, long long n1);

/// rho^(2k) * initial_sq + p sigma^2 sum_{j<k} rho^(2(k-j)-1) / n_j with
/// rho = contraction_rate(ball, sigma).
double long_term_bound(const KnowledgeBall& ball, double sigma, Eigen::Index p, double initial_sq,
                       std::span<const long long> schedule, std::size_t k);

/// E|theta_hat0 - center|^2 = |theta* - center|^2 + sigma^2 sum mu_j^-2.
double expected_initial_sq_to_center(const SpectralDesign& design, const Eigen::VectorXd& true_theta,
                                     const KnowledgeBall& ball, double sigma);

/// Uniformly distributed unit vector.
Eigen::VectorXd random_unit_vector(Eigen::Index p, RngStream& stream);

}  // namespace vretrain
