#ifndef ROLEM_MATVAR_HPP
#define ROLEM_MATVAR_HPP

#include <Eigen/Dense>

#include "rolem/errors.hpp"
#include "rolem/rng.hpp"

namespace rolem::matvar {

// MN(M, L1, L2): mean M (a x b), row covariance L1 (a x a), column
// covariance L2 (b x b), density with kernel
// etr(-1/2 L1^{-1}(Y-M) L2^{-1}(Y-M)').  vec(Y) ~ N(vec(M), L2 (x) L1).
struct MatNormalParams {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd row_cov;
  Eigen::MatrixXd col_cov;
};

// MT(nu, M, L1, L2): arises from MN(M, tau^{-1} L1, L2) with
// tau ~ Gamma(nu/2, nu/2) in shape-rate form.
struct MatTParams {
  double dof;
  Eigen::MatrixXd mean;
  Eigen::MatrixXd row_cov;
  Eigen::MatrixXd col_cov;
};

// Convention: density proportional to |W|^{-(dof+d+1)/2} etr(-1/2 scale W^{-1}),
// so E(W) = scale / (dof - d - 1) when dof > d + 1.  Software conventions for
// the inverse-Wishart differ; this one matches the prior displays used by the
// sampler module.
struct InvWishartParams {
  double dof;
  Eigen::MatrixXd scale;
};

// Cholesky with SPD validation; no jitter is added, callers decide on
// regularization.  `what` names the offending matrix in the error message.
Eigen::LLT<Eigen::MatrixXd> spd_cholesky(const Eigen::MatrixXd& m,
                                         const char* what);

// log |m| from its Cholesky factor.
double logdet_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt);

double mn_logpdf(const Eigen::MatrixXd& y, const MatNormalParams& params);
Eigen::MatrixXd mn_sample(const MatNormalParams& params, Rng& rng);

double mt_logpdf(const Eigen::MatrixXd& y, const MatTParams& params);

Eigen::MatrixXd invwishart_sample(const InvWishartParams& params, Rng& rng);

// Gamma(shape, rate) log-density; shared by the tau conditional, the nu
// target, and quadrature oracles.
double gamma_logpdf(double x, double shape, double rate);

}  // namespace rolem::matvar

#endif  // ROLEM_MATVAR_HPP
