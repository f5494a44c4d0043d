#ifndef ROLEM_MODEL_HPP
#define ROLEM_MODEL_HPP

#include <vector>

#include <Eigen/Dense>

#include "rolem/corrstruct.hpp"
#include "rolem/errors.hpp"
#include "rolem/grassmann.hpp"

namespace rolem::model {

enum class ErrorModel { T, Normal };

// One subject's responses (r x J) and covariates (p x J); unequal J across
// subjects is allowed.
struct Subject {
  Eigen::MatrixXd y;
  Eigen::MatrixXd x;

  int times() const { return static_cast<int>(y.cols()); }
};

class LongitudinalDataset {
 public:
  LongitudinalDataset() = default;
  LongitudinalDataset(std::vector<Subject> subjects, int r, int p);

  int n() const { return static_cast<int>(subjects_.size()); }
  int response_dim() const { return r_; }
  int covariate_dim() const { return p_; }
  int total_times() const { return total_times_; }
  const Subject& subject(int i) const { return subjects_.at(i); }
  const std::vector<Subject>& subjects() const { return subjects_; }

  // Replaces all response matrices, keeping covariates; used when data are
  // re-simulated against fixed X.
  void set_responses(const std::vector<Eigen::MatrixXd>& ys);

 private:
  std::vector<Subject> subjects_;
  int r_ = 0;
  int p_ = 0;
  int total_times_ = 0;
};

// One point of the augmented parameter vector.
struct ParameterState {
  Eigen::VectorXd alpha;             // r
  Eigen::MatrixXd eta;               // u x p
  grassmann::Projection projection;  // r x r, rank u
  grassmann::EnvelopeBasis basis;    // derived from projection + frame
  Eigen::MatrixXd omega;             // u x u SPD
  Eigen::MatrixXd omega0;            // (r-u) x (r-u) SPD
  double rho = 0.5;
  double nu = 10.0;
  Eigen::VectorXd tau;               // n, positive

  int u() const { return static_cast<int>(eta.rows()); }
};

struct EnvelopeAssembly {
  Eigen::MatrixXd beta;       // r x p
  Eigen::MatrixXd sigma_eps;  // r x r SPD
};

// beta = gamma eta, sigma_eps = gamma omega gamma' + gamma0 omega0 gamma0'.
EnvelopeAssembly assemble(const ParameterState& state);

// tr(sigma_eps^{-1} E R^{-1} E') with E = y - alpha 1' - beta x.
double delta_i(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
               const EnvelopeAssembly& assembly, const Eigen::VectorXd& alpha,
               const Eigen::MatrixXd& corr_inv);

// Complete-data log-likelihood given tau:
//   sum_i log MN(Y_i; alpha 1' + beta X_i, tau_i^{-1} sigma_eps, R_i).
double loglik_conditional(const LongitudinalDataset& data,
                          const ParameterState& state, corr::Kind kind);

// Marginal log-likelihood: matrix-t per subject in t mode, matrix normal in
// normal mode.  Feeds BIC's maximized likelihood and WAIC's pointwise terms.
double loglik_marginal(const LongitudinalDataset& data,
                       const ParameterState& state, corr::Kind kind,
                       ErrorModel error_model);

// Per-subject marginal log densities for the flattened parameter point.
Eigen::VectorXd pointwise_marginal(const LongitudinalDataset& data,
                                   const Eigen::VectorXd& alpha,
                                   const Eigen::MatrixXd& beta,
                                   const Eigen::MatrixXd& sigma_eps,
                                   double rho, double nu, corr::Kind kind,
                                   ErrorModel error_model);

}  // namespace rolem::model

#endif  // ROLEM_MODEL_HPP
