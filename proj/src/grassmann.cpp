#include "rolem/grassmann.hpp"

#include <cmath>
#include <limits>

#include "rolem/matvar.hpp"

namespace rolem::grassmann {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kIdemTol = 1e-8;
constexpr double kTraceTol = 1e-8;
constexpr double kEigenClampTol = 1e-6;
constexpr double kFrameCondLimit = 1e10;
constexpr int kProposalRetries = 5;

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

void check_symmetric(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() ||
      (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + m.cwiseAbs().maxCoeff()))
    throw InvalidParameterError(std::string(what) + " must be symmetric");
}

// Fix the sign of each column so its first non-negligible entry is positive.
void canonical_signs(Eigen::MatrixXd& vectors) {
  for (int j = 0; j < vectors.cols(); ++j) {
    const double scale = vectors.col(j).cwiseAbs().maxCoeff();
    for (int i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, j)) > 1e-12 * scale) {
        if (vectors(i, j) < 0.0) vectors.col(j) = -vectors.col(j);
        break;
      }
    }
  }
}

// Projection onto the column space of z via Householder QR; returns false
// when z is numerically rank deficient.
bool column_space_projection(const Eigen::MatrixXd& z, Eigen::MatrixXd* proj) {
  const int r = static_cast<int>(z.rows());
  const int u = static_cast<int>(z.cols());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  Eigen::VectorXd diag = qr.matrixQR().diagonal().head(u).cwiseAbs();
  if (diag.minCoeff() <= 1e-12 * std::max(diag.maxCoeff(), 1e-300))
    return false;
  Eigen::MatrixXd q_thin =
      qr.householderQ() * Eigen::MatrixXd::Identity(r, u);
  *proj = symmetrize(q_thin * q_thin.transpose());
  return true;
}

}  // namespace

bool satisfies_invariants(const Projection& p) {
  const auto& m = p.matrix;
  if (m.rows() != m.cols() || p.rank < 0 || p.rank > m.rows()) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() >= kSymTol) return false;
  if ((m * m - m).cwiseAbs().maxCoeff() >= kIdemTol) return false;
  if (std::abs(m.trace() - p.rank) >= kTraceTol) return false;
  return true;
}

Projection make_projection(const Eigen::MatrixXd& m, int rank) {
  Projection p{m, rank};
  if (!satisfies_invariants(p))
    throw InvalidParameterError(
        "matrix is not a rank-" + std::to_string(rank) + " projection");
  return p;
}

EnvelopeBasis basis_from_projection(const Projection& p,
                                    const Eigen::MatrixXd& frame) {
  const int r = p.dim();
  const int u = p.rank;
  if (frame.rows() != r || frame.cols() != r)
    throw InvalidParameterError("frame dimension does not match projection");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.matrix);
  if (eig.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of projection failed");

  // Eigenvalues of a projection are 0/1 up to MCMC round-off; anything
  // further off means the input is not a projection.
  int ones = 0;
  for (int i = 0; i < r; ++i) {
    const double lam = eig.eigenvalues()(i);
    if (std::abs(lam - 1.0) <= kEigenClampTol)
      ++ones;
    else if (std::abs(lam) > kEigenClampTol)
      throw InvalidParameterError("projection eigenvalues are not 0/1");
  }
  if (ones != u)
    throw InvalidParameterError("projection rank does not match eigenvalues");

  // Ascending order: the u unit eigenvalues sit in the trailing columns.
  Eigen::MatrixXd gamma_tilde = eig.eigenvectors().rightCols(u);

  const Eigen::MatrixXd u1 = frame.leftCols(u);
  const Eigen::MatrixXd u2 = frame.rightCols(r - u);
  const Eigen::MatrixXd b = u1.transpose() * gamma_tilde;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(u - 1);
  if (!(smin > 0.0) || smax / smin > kFrameCondLimit)
    throw FrameError("U1' * gamma_tilde is near singular; pick a new frame");

  Eigen::MatrixXd a = (u2.transpose() * gamma_tilde) * svd.solve(
      Eigen::MatrixXd::Identity(u, u));

  EnvelopeBasis basis;
  basis.a_coord = a;
  basis.gamma = (u1 + u2 * a) *
                inv_sqrt_spd(Eigen::MatrixXd::Identity(u, u) +
                             a.transpose() * a);
  basis.gamma0 = (-u1 * a.transpose() + u2) *
                 inv_sqrt_spd(Eigen::MatrixXd::Identity(r - u, r - u) +
                              a * a.transpose());
  return basis;
}

double langevin_logdensity_unnorm(const Projection& p,
                                  const Eigen::MatrixXd& m) {
  check_symmetric(m, "Langevin parameter M");
  if (m.rows() != p.dim())
    throw InvalidParameterError("Langevin parameter dimension mismatch");
  return (m * p.matrix).trace();
}

double induced_logdensity(const Projection& p, const Eigen::MatrixXd& w) {
  const int r = p.dim();
  if (w.rows() != r || w.cols() != r)
    throw InvalidParameterError("W dimension does not match projection");
  auto w_llt = matvar::spd_cholesky(w, "W");
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(r, r) - p.matrix +
                      w_llt.solve(p.matrix);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
  double log_abs_det = 0.0;
  double sign = lu.permutationP().determinant();
  for (int i = 0; i < r; ++i) {
    const double d = lu.matrixLU()(i, i);
    if (d == 0.0 || !std::isfinite(d))
      throw NumericalError("I - P + W^{-1} P is singular");
    if (d < 0.0) sign = -sign;
    log_abs_det += std::log(std::abs(d));
  }
  if (sign <= 0.0)
    throw NumericalError("I - P + W^{-1} P has non-positive determinant");

  return -0.5 * p.rank * matvar::logdet_from_llt(w_llt) -
         0.5 * r * log_abs_det;
}

Projection propose_projection(const Projection& current, double sigma2,
                              Rng& rng) {
  if (!(sigma2 > 0.0))
    throw InvalidParameterError("proposal sigma2 must be positive");
  const int r = current.dim();
  const int u = current.rank;
  Eigen::MatrixXd w =
      sigma2 * Eigen::MatrixXd::Identity(r, r) + current.matrix;
  auto w_llt = matvar::spd_cholesky(w, "proposal W");
  const Eigen::MatrixXd w_chol = w_llt.matrixL();

  for (int attempt = 0; attempt < kProposalRetries; ++attempt) {
    Eigen::MatrixXd z = w_chol * rng.normal_matrix(r, u);
    Eigen::MatrixXd proj;
    if (column_space_projection(z, &proj)) return Projection{proj, u};
  }
  throw NumericalError("projection proposal was rank deficient repeatedly");
}

ModeResult projection_mode(const Eigen::MatrixXd& m, int u) {
  check_symmetric(m, "mode parameter M");
  const int r = static_cast<int>(m.rows());
  if (u < 1 || u > r)
    throw InvalidParameterError("mode rank out of range");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(m));
  if (eig.info() != Eigen::Success)
    throw NumericalError("eigendecomposition failed");

  // Reverse to descending eigenvalue order with the canonical sign choice.
  Eigen::VectorXd values = eig.eigenvalues().reverse();
  Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  canonical_signs(vectors);

  Eigen::MatrixXd u1 = vectors.leftCols(u);
  Projection p{symmetrize(u1 * u1.transpose()), u};

  const double scale =
      std::max({std::abs(values(0)), std::abs(values(r - 1)), 1e-300});
  int rank = 0;
  for (int i = 0; i < r; ++i)
    if (std::abs(values(i)) > 1e-10 * scale) ++rank;
  bool unique = rank >= u;
  if (u < r) unique = unique && (values(u - 1) - values(u)) > 1e-10 * scale;
  return {p, unique};
}

Projection sample_uniform_projection(int r, int u, Rng& rng) {
  if (u < 1 || u > r)
    throw InvalidParameterError("uniform projection rank out of range");
  for (int attempt = 0; attempt < kProposalRetries; ++attempt) {
    Eigen::MatrixXd proj;
    if (column_space_projection(rng.normal_matrix(r, u), &proj))
      return Projection{proj, u};
  }
  throw NumericalError("uniform projection draw was rank deficient");
}

Eigen::MatrixXd inv_sqrt_spd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(m));
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
    throw InvalidParameterError("matrix is not SPD in inv_sqrt_spd");
  return eig.eigenvectors() *
         eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace rolem::grassmann
