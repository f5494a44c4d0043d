#ifndef ROLEM_SIMGEN_HPP
#define ROLEM_SIMGEN_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rolem/corrstruct.hpp"
#include "rolem/model.hpp"
#include "rolem/rng.hpp"

namespace rolem::simgen {

// Error laws share the second moment 2 (R (x) Sigma_eps): t with 4 dof,
// iid N(0, 2) components, and the 0.9 N(0,1) + 0.1 N(0,11) mixture.
enum class ErrorKind { T4, NormalVar2, Mixture };

struct SimDesign {
  int r = 20;
  int p = 30;
  int u = 3;
  int n = 100;
  int j = 5;
  double rho_true = 0.5;
  corr::Kind corr_kind = corr::Kind::Ar1;
  ErrorKind error_kind = ErrorKind::T4;
  std::optional<Eigen::MatrixXd> fixed_a;  // (r-u) x u
};

struct GroundTruth {
  Eigen::VectorXd alpha;
  Eigen::MatrixXd beta;
  Eigen::MatrixXd sigma_eps;
  Eigen::MatrixXd gamma;
  double rho = 0.5;
  double nu = 4.0;  // NaN for non-t error kinds
  ErrorKind error_kind = ErrorKind::T4;
};

// Draws one synthetic dataset: A ~ U(-1,1) entries (or fixed_a), identity
// frame, diagonal Omega ~ U(0,1) / Omega0 ~ U(5,10), X iid N(0,1),
// alpha/eta entries U(-5,5), Y = alpha 1' + Gamma eta X + eps.
std::pair<model::LongitudinalDataset, GroundTruth> generate(
    const SimDesign& design, Rng& rng);

// (Gamma, Gamma0) from a free coordinate A under the identity frame.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> basis_from_a(
    const Eigen::MatrixXd& a);

// The fixed A pattern (a, I3, a, I3, ..., a)' with a = (-1, 1, 1)',
// tiled to (r - u) x 3; requires u = 3.
Eigen::MatrixXd structured_design_a(int r, int u = 3);

// Unit vectors 1_{r/4} (x) v_k / sqrt(r) for the three Walsh-type v_k;
// requires r divisible by 4.
std::vector<Eigen::VectorXd> structured_gammas(int r);

// M_1 = s0 I, M_2 = s1 g1 g1' + s0 I, M_3 adds g2 g2', M_4 adds g3 g3'.
Eigen::MatrixXd structured_prior_matrix(int r, double s1, double s0,
                                        int which);

std::string error_kind_name(ErrorKind kind);
ErrorKind parse_error_kind(const std::string& name);

}  // namespace rolem::simgen

#endif  // ROLEM_SIMGEN_HPP
