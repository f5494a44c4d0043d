#include "rolem/model.hpp"

#include <cmath>

#include "rolem/matvar.hpp"

namespace rolem::model {

LongitudinalDataset::LongitudinalDataset(std::vector<Subject> subjects, int r,
                                         int p)
    : subjects_(std::move(subjects)), r_(r), p_(p) {
  for (const auto& s : subjects_) {
    if (s.y.rows() != r_)
      throw InvalidParameterError("all Y_i must share the response dimension");
    if (s.x.rows() != p_)
      throw InvalidParameterError("all X_i must share the covariate dimension");
    if (s.y.cols() != s.x.cols() || s.y.cols() < 1)
      throw InvalidParameterError("Y_i and X_i column counts must agree");
    total_times_ += s.times();
  }
}

void LongitudinalDataset::set_responses(const std::vector<Eigen::MatrixXd>& ys) {
  if (static_cast<int>(ys.size()) != n())
    throw InvalidParameterError("response count does not match dataset");
  for (int i = 0; i < n(); ++i) {
    if (ys[i].rows() != r_ || ys[i].cols() != subjects_[i].times())
      throw InvalidParameterError("response dimensions changed in set_responses");
    subjects_[i].y = ys[i];
  }
}

EnvelopeAssembly assemble(const ParameterState& state) {
  EnvelopeAssembly out;
  out.beta = state.basis.gamma * state.eta;
  Eigen::MatrixXd s =
      state.basis.gamma * state.omega * state.basis.gamma.transpose() +
      state.basis.gamma0 * state.omega0 * state.basis.gamma0.transpose();
  out.sigma_eps = 0.5 * (s + s.transpose());
  return out;
}

double delta_i(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
               const EnvelopeAssembly& assembly, const Eigen::VectorXd& alpha,
               const Eigen::MatrixXd& corr_inv) {
  if (y.cols() != x.cols() || y.cols() != corr_inv.rows() ||
      y.rows() != alpha.size())
    throw InvalidParameterError("delta_i dimension mismatch");
  auto llt = matvar::spd_cholesky(assembly.sigma_eps, "sigma_eps");
  Eigen::MatrixXd e = y - alpha * Eigen::RowVectorXd::Ones(y.cols()) -
                      assembly.beta * x;
  Eigen::MatrixXd f = llt.matrixL().solve(e);
  return (f.cwiseProduct(f * corr_inv)).sum();
}

double loglik_conditional(const LongitudinalDataset& data,
                          const ParameterState& state, corr::Kind kind) {
  const EnvelopeAssembly assembly = assemble(state);
  const corr::Spec spec{kind, state.rho};
  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const Subject& s = data.subject(i);
    matvar::MatNormalParams params{
        state.alpha * Eigen::RowVectorXd::Ones(s.times()) +
            assembly.beta * s.x,
        assembly.sigma_eps / state.tau(i), corr::matrix(spec, s.times())};
    total += matvar::mn_logpdf(s.y, params);
  }
  return total;
}

double loglik_marginal(const LongitudinalDataset& data,
                       const ParameterState& state, corr::Kind kind,
                       ErrorModel error_model) {
  const EnvelopeAssembly assembly = assemble(state);
  return pointwise_marginal(data, state.alpha, assembly.beta,
                            assembly.sigma_eps, state.rho, state.nu, kind,
                            error_model)
      .sum();
}

Eigen::VectorXd pointwise_marginal(const LongitudinalDataset& data,
                                   const Eigen::VectorXd& alpha,
                                   const Eigen::MatrixXd& beta,
                                   const Eigen::MatrixXd& sigma_eps,
                                   double rho, double nu, corr::Kind kind,
                                   ErrorModel error_model) {
  const corr::Spec spec{kind, rho};
  Eigen::VectorXd out(data.n());
  for (int i = 0; i < data.n(); ++i) {
    const Subject& s = data.subject(i);
    Eigen::MatrixXd mean =
        alpha * Eigen::RowVectorXd::Ones(s.times()) + beta * s.x;
    Eigen::MatrixXd r_mat = corr::matrix(spec, s.times());
    if (error_model == ErrorModel::T) {
      out(i) = matvar::mt_logpdf(s.y, {nu, mean, sigma_eps, r_mat});
    } else {
      out(i) = matvar::mn_logpdf(s.y, {mean, sigma_eps, r_mat});
    }
  }
  return out;
}

}  // namespace rolem::model
