#ifndef ROLEM_INFERENCE_HPP
#define ROLEM_INFERENCE_HPP

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rolem/corrstruct.hpp"
#include "rolem/model.hpp"

namespace rolem::inference {

struct ModelScore {
  double bic = 0.0;
  double waic = 0.0;
  double lppd = 0.0;
  double p_waic = 0.0;
  double max_loglik = 0.0;
  int p_bic = 0;
};

// Effective parameter count: r + up + (r-u)u + u(u+1)/2 + (r-u)(r-u+1)/2
// + 1 (rho) + 1 (nu); the normal model drops the nu slot.
int bic_parameter_count(int r, int p, int u, bool normal_mode);

// -2 max(loglik over draws) + p_bic log n.
double bic(const std::vector<double>& logliks, int p_bic, int n);

struct WaicResult {
  double waic = 0.0;
  double lppd = 0.0;
  double p_waic = 0.0;
};

// pointwise(s, i) = log p(y_i | theta_s); draws down the rows.  lppd uses a
// stable log-mean-exp, the penalty uses the unbiased sample variance.
WaicResult waic(const Eigen::MatrixXd& pointwise);

// Shortest interval covering ceil(level * n) consecutive order statistics.
// Requires at least 20 samples.
std::pair<double, double> hpd_interval(std::vector<double> samples,
                                       double level);

double frobenius_error(const Eigen::MatrixXd& estimate,
                       const Eigen::MatrixXd& truth);

// Lag-1..max_lag autocorrelations (biased covariance normalization).
Eigen::VectorXd autocorrelations(const std::vector<double>& series,
                                 int max_lag);

// Geyer initial-positive-sequence truncation.
double effective_sample_size(const std::vector<double>& series);

struct SeriesDiagnostics {
  double ess = 0.0;
  Eigen::VectorXd acf;
};

SeriesDiagnostics series_diagnostics(const std::vector<double>& series,
                                     int max_lag = 50);

// Split-R-hat over two or more chains of equal length (convenience).
double split_rhat(const std::vector<std::vector<double>>& chains);

double log_mean_exp(const Eigen::VectorXd& values);

// Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(long successes, long trials,
                                          double z = 1.959963984540054);

// --- cross-validation scoring -------------------------------------------

// The slice of a posterior draw needed to score held-out subjects.
struct PredictiveDraw {
  Eigen::VectorXd alpha;
  Eigen::MatrixXd beta;
  Eigen::MatrixXd sigma_eps;
  double rho = 0.5;
  double nu = 10.0;
};

using FitFunction = std::function<std::vector<PredictiveDraw>(
    const model::LongitudinalDataset&)>;

struct CvScores {
  double mlpd = 0.0;
  double mae = 0.0;
};

// Deterministic shuffled round-robin assignment of subjects to folds.
std::vector<int> fold_assignment(int n, int k_folds, std::uint64_t seed);

// K-fold CV over subjects.  MLPD averages the log posterior predictive
// density (draw-averaged marginal density) per held-out subject; MAE is the
// mean absolute error of the posterior-mean prediction alpha + beta x per
// response entry.
CvScores cv_scores(const model::LongitudinalDataset& data, int k_folds,
                   corr::Kind kind, model::ErrorModel error_model,
                   const FitFunction& fit, std::uint64_t seed);

}  // namespace rolem::inference

#endif  // ROLEM_INFERENCE_HPP
