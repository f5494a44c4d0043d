#include "rolem/matvar.hpp"

#include <cmath>
#include <string>

namespace rolem::matvar {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kLogPi = 1.1447298858494001741;
}  // namespace

Eigen::LLT<Eigen::MatrixXd> spd_cholesky(const Eigen::MatrixXd& m,
                                         const char* what) {
  if (m.rows() != m.cols())
    throw InvalidParameterError(std::string(what) + " is not square");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw InvalidParameterError(std::string(what) +
                                " is not symmetric positive definite");
  return llt;
}

double logdet_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

namespace {

// tr(L1^{-1} E L2^{-1} E') via triangular solves: with F = L1^{-1} E the
// trace equals ||L2_chol^{-1} F'||_F^2.
double quad_trace(const Eigen::MatrixXd& e,
                  const Eigen::LLT<Eigen::MatrixXd>& row_llt,
                  const Eigen::LLT<Eigen::MatrixXd>& col_llt) {
  Eigen::MatrixXd f = row_llt.matrixL().solve(e);
  Eigen::MatrixXd g = col_llt.matrixL().solve(f.transpose());
  return g.squaredNorm();
}

void check_dims(const Eigen::MatrixXd& y, const Eigen::MatrixXd& mean,
                const Eigen::MatrixXd& row_cov,
                const Eigen::MatrixXd& col_cov) {
  if (y.rows() != mean.rows() || y.cols() != mean.cols())
    throw InvalidParameterError("observation and mean dimensions differ");
  if (row_cov.rows() != y.rows() || col_cov.rows() != y.cols())
    throw InvalidParameterError("covariance dimensions inconsistent");
}

}  // namespace

double mn_logpdf(const Eigen::MatrixXd& y, const MatNormalParams& params) {
  check_dims(y, params.mean, params.row_cov, params.col_cov);
  const double a = static_cast<double>(y.rows());
  const double b = static_cast<double>(y.cols());
  auto row_llt = spd_cholesky(params.row_cov, "row_cov");
  auto col_llt = spd_cholesky(params.col_cov, "col_cov");
  const double quad = quad_trace(y - params.mean, row_llt, col_llt);
  return -0.5 * a * b * kLogTwoPi - 0.5 * b * logdet_from_llt(row_llt) -
         0.5 * a * logdet_from_llt(col_llt) - 0.5 * quad;
}

Eigen::MatrixXd mn_sample(const MatNormalParams& params, Rng& rng) {
  auto row_llt = spd_cholesky(params.row_cov, "row_cov");
  auto col_llt = spd_cholesky(params.col_cov, "col_cov");
  const int a = static_cast<int>(params.mean.rows());
  const int b = static_cast<int>(params.mean.cols());
  Eigen::MatrixXd z = rng.normal_matrix(a, b);
  return params.mean + Eigen::MatrixXd(row_llt.matrixL()) * z *
                           Eigen::MatrixXd(col_llt.matrixL()).transpose();
}

double mt_logpdf(const Eigen::MatrixXd& y, const MatTParams& params) {
  if (!(params.dof > 0.0))
    throw InvalidParameterError("matrix-t dof must be positive");
  check_dims(y, params.mean, params.row_cov, params.col_cov);
  const double a = static_cast<double>(y.rows());
  const double b = static_cast<double>(y.cols());
  const double ab = a * b;
  const double nu = params.dof;
  auto row_llt = spd_cholesky(params.row_cov, "row_cov");
  auto col_llt = spd_cholesky(params.col_cov, "col_cov");
  const double quad = quad_trace(y - params.mean, row_llt, col_llt);
  return std::lgamma(0.5 * (ab + nu)) - std::lgamma(0.5 * nu) -
         0.5 * ab * std::log(nu) - 0.5 * ab * kLogPi -
         0.5 * b * logdet_from_llt(row_llt) -
         0.5 * a * logdet_from_llt(col_llt) -
         0.5 * (ab + nu) * std::log1p(quad / nu);
}

Eigen::MatrixXd invwishart_sample(const InvWishartParams& params, Rng& rng) {
  const int d = static_cast<int>(params.scale.rows());
  if (!(params.dof > d - 1))
    throw InvalidParameterError("inverse-Wishart dof must exceed dim - 1");
  auto scale_llt = spd_cholesky(params.scale, "scale");

  // Bartlett draw of W ~ Wishart(dof, scale^{-1}); the returned matrix is
  // W^{-1} ~ IW(dof, scale).
  Eigen::MatrixXd bart = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    bart(i, i) = std::sqrt(rng.chi_squared(params.dof - i));
    for (int j = 0; j < i; ++j) bart(i, j) = rng.normal();
  }
  // scale^{-1} = L^{-T} L^{-1}, so T = L^{-T} satisfies T T' = scale^{-1}.
  Eigen::MatrixXd t = Eigen::MatrixXd(scale_llt.matrixL())
                          .triangularView<Eigen::Lower>()
                          .solve(Eigen::MatrixXd::Identity(d, d))
                          .transpose();
  Eigen::MatrixXd m = t * bart;
  Eigen::MatrixXd w = m * m.transpose();
  Eigen::LLT<Eigen::MatrixXd> w_llt(w);
  if (w_llt.info() != Eigen::Success)
    throw NumericalError("inverse-Wishart draw lost positive definiteness");
  Eigen::MatrixXd inv = w_llt.solve(Eigen::MatrixXd::Identity(d, d));
  return 0.5 * (inv + inv.transpose());
}

double gamma_logpdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw InvalidParameterError("gamma shape and rate must be positive");
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) +
         (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace rolem::matvar
