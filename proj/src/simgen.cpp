#include "rolem/simgen.hpp"

#include <cmath>
#include <limits>

#include "rolem/grassmann.hpp"
#include "rolem/matvar.hpp"

namespace rolem::simgen {

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> basis_from_a(
    const Eigen::MatrixXd& a) {
  const int u = static_cast<int>(a.cols());
  const int r = u + static_cast<int>(a.rows());
  Eigen::MatrixXd u1 = Eigen::MatrixXd::Identity(r, r).leftCols(u);
  Eigen::MatrixXd u2 = Eigen::MatrixXd::Identity(r, r).rightCols(r - u);
  Eigen::MatrixXd gamma =
      (u1 + u2 * a) * grassmann::inv_sqrt_spd(
                          Eigen::MatrixXd::Identity(u, u) + a.transpose() * a);
  Eigen::MatrixXd gamma0 =
      (-u1 * a.transpose() + u2) *
      grassmann::inv_sqrt_spd(Eigen::MatrixXd::Identity(r - u, r - u) +
                              a * a.transpose());
  return {gamma, gamma0};
}

namespace {

Eigen::MatrixXd draw_error(const SimDesign& design,
                           const Eigen::MatrixXd& sigma_chol,
                           const Eigen::MatrixXd& corr_chol, Rng& rng) {
  const int r = design.r;
  const int j = design.j;
  Eigen::MatrixXd z(r, j);
  switch (design.error_kind) {
    case ErrorKind::T4: {
      const double tau = rng.gamma(2.0, 2.0);  // Gamma(nu/2, nu/2), nu = 4
      z = rng.normal_matrix(r, j) / std::sqrt(tau);
      break;
    }
    case ErrorKind::NormalVar2:
      z = std::sqrt(2.0) * rng.normal_matrix(r, j);
      break;
    case ErrorKind::Mixture:
      for (int c = 0; c < j; ++c)
        for (int i = 0; i < r; ++i) {
          const double sd = rng.uniform() < 0.9 ? 1.0 : std::sqrt(11.0);
          z(i, c) = sd * rng.normal();
        }
      break;
  }
  return sigma_chol * z * corr_chol.transpose();
}

}  // namespace

std::pair<model::LongitudinalDataset, GroundTruth> generate(
    const SimDesign& design, Rng& rng) {
  const int r = design.r;
  const int p = design.p;
  const int u = design.u;
  if (u < 1 || u >= r) throw InvalidParameterError("design requires u < r");

  Eigen::MatrixXd a(r - u, u);
  if (design.fixed_a) {
    if (design.fixed_a->rows() != r - u || design.fixed_a->cols() != u)
      throw InvalidParameterError("fixed_a must be (r-u) x u");
    a = *design.fixed_a;
  } else {
    for (int i = 0; i < a.rows(); ++i)
      for (int c = 0; c < a.cols(); ++c) a(i, c) = rng.uniform(-1.0, 1.0);
  }
  auto [gamma, gamma0] = basis_from_a(a);

  Eigen::VectorXd omega_diag(u), omega0_diag(r - u);
  for (int i = 0; i < u; ++i) omega_diag(i) = rng.uniform(0.0, 1.0);
  for (int i = 0; i < r - u; ++i) omega0_diag(i) = rng.uniform(5.0, 10.0);
  Eigen::MatrixXd sigma_eps =
      gamma * omega_diag.asDiagonal() * gamma.transpose() +
      gamma0 * omega0_diag.asDiagonal() * gamma0.transpose();
  sigma_eps = 0.5 * (sigma_eps + sigma_eps.transpose());

  Eigen::VectorXd alpha(r);
  for (int i = 0; i < r; ++i) alpha(i) = rng.uniform(-5.0, 5.0);
  Eigen::MatrixXd eta(u, p);
  for (int i = 0; i < u; ++i)
    for (int c = 0; c < p; ++c) eta(i, c) = rng.uniform(-5.0, 5.0);
  Eigen::MatrixXd beta = gamma * eta;

  const Eigen::MatrixXd sigma_chol =
      matvar::spd_cholesky(sigma_eps, "sigma_eps").matrixL();
  const Eigen::MatrixXd corr_chol =
      matvar::spd_cholesky(
          corr::matrix(corr::Spec{design.corr_kind, design.rho_true},
                       design.j),
          "R")
          .matrixL();

  std::vector<model::Subject> subjects;
  subjects.reserve(design.n);
  const Eigen::RowVectorXd ones = Eigen::RowVectorXd::Ones(design.j);
  for (int i = 0; i < design.n; ++i) {
    model::Subject s;
    s.x = rng.normal_matrix(p, design.j);
    s.y = alpha * ones + beta * s.x +
          draw_error(design, sigma_chol, corr_chol, rng);
    subjects.push_back(std::move(s));
  }

  GroundTruth truth;
  truth.alpha = alpha;
  truth.beta = beta;
  truth.sigma_eps = sigma_eps;
  truth.gamma = gamma;
  truth.rho = design.rho_true;
  truth.nu = design.error_kind == ErrorKind::T4
                 ? 4.0
                 : std::numeric_limits<double>::quiet_NaN();
  truth.error_kind = design.error_kind;
  return {model::LongitudinalDataset(std::move(subjects), r, p), truth};
}

Eigen::MatrixXd structured_design_a(int r, int u) {
  if (u != 3) throw InvalidParameterError("structured A pattern requires u = 3");
  if (r <= u) throw InvalidParameterError("structured A requires r > u");
  const Eigen::RowVector3d a_row(-1.0, 1.0, 1.0);
  Eigen::MatrixXd a(r - u, 3);
  int row = 0;
  bool single = true;
  while (row < r - u) {
    if (single) {
      a.row(row++) = a_row;
    } else {
      for (int k = 0; k < 3 && row < r - u; ++k)
        a.row(row++) = Eigen::RowVector3d::Unit(k);
    }
    single = !single;
  }
  return a;
}

std::vector<Eigen::VectorXd> structured_gammas(int r) {
  if (r % 4 != 0)
    throw InvalidParameterError("structured gammas require r divisible by 4");
  const int tiles = r / 4;
  const double scale = 1.0 / std::sqrt(static_cast<double>(r));
  Eigen::Vector4d v1(1, 1, 1, 1), v2(1, -1, 1, -1), v3(1, 1, -1, -1);
  std::vector<Eigen::VectorXd> gammas;
  for (const auto& v : {v1, v2, v3}) {
    Eigen::VectorXd g(r);
    for (int t = 0; t < tiles; ++t) g.segment(4 * t, 4) = v;
    gammas.push_back(scale * g);
  }
  return gammas;
}

Eigen::MatrixXd structured_prior_matrix(int r, double s1, double s0,
                                        int which) {
  if (which < 1 || which > 4)
    throw InvalidParameterError("structured prior index must be 1..4");
  Eigen::MatrixXd m = s0 * Eigen::MatrixXd::Identity(r, r);
  auto gammas = structured_gammas(r);
  for (int k = 0; k < which - 1; ++k)
    m += s1 * gammas[k] * gammas[k].transpose();
  return m;
}

std::string error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::T4: return "t4";
    case ErrorKind::NormalVar2: return "normal";
    case ErrorKind::Mixture: return "mixture";
  }
  throw InvalidParameterError("unknown error kind");
}

ErrorKind parse_error_kind(const std::string& name) {
  if (name == "t4") return ErrorKind::T4;
  if (name == "normal") return ErrorKind::NormalVar2;
  if (name == "mixture") return ErrorKind::Mixture;
  throw InvalidParameterError("unknown error kind: " + name);
}

}  // namespace rolem::simgen
