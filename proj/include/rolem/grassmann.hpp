#ifndef ROLEM_GRASSMANN_HPP
#define ROLEM_GRASSMANN_HPP

#include <Eigen/Dense>

#include "rolem/errors.hpp"
#include "rolem/rng.hpp"

namespace rolem::grassmann {

// Rank-u symmetric idempotent matrix representing a u-dimensional subspace.
struct Projection {
  Eigen::MatrixXd matrix;
  int rank = 0;

  int dim() const { return static_cast<int>(matrix.rows()); }
};

// Orthogonal pair (gamma, gamma0) extracted from a projection through a
// fixed reference frame, together with the free coordinate A:
//   gamma  = (U1 + U2 A)(I + A'A)^{-1/2}
//   gamma0 = (-U1 A' + U2)(I + A A')^{-1/2}
struct EnvelopeBasis {
  Eigen::MatrixXd gamma;    // r x u
  Eigen::MatrixXd gamma0;   // r x (r - u)
  Eigen::MatrixXd a_coord;  // (r - u) x u
};

// True when `p` is symmetric (1e-10), idempotent (1e-8) and has trace within
// 1e-8 of its declared rank.
bool satisfies_invariants(const Projection& p);

// Validating constructor; throws InvalidParameterError when the invariants
// fail.
Projection make_projection(const Eigen::MatrixXd& m, int rank);

// Unique (gamma, gamma0, A) representative of P under the frame (U1, U2).
// Throws FrameError when U1' * gamma_tilde has condition number above 1e10,
// signalling the caller to pick a different frame.
EnvelopeBasis basis_from_projection(const Projection& p,
                                    const Eigen::MatrixXd& frame);

// log density of the matrix Langevin distribution up to its hypergeometric
// normalizer: tr(M P).  M must be symmetric.
double langevin_logdensity_unnorm(const Projection& p, const Eigen::MatrixXd& m);

// log density of the projection of a normal random matrix:
//   -(u/2) log|W| - (r/2) log|I - P + W^{-1} P|,  W SPD.
double induced_logdensity(const Projection& p, const Eigen::MatrixXd& w);

// Random-walk proposal: P* = Z (Z'Z)^{-1} Z' with Z ~ MN(0, sigma2 I + P, I_u).
Projection propose_projection(const Projection& current, double sigma2,
                              Rng& rng);

struct ModeResult {
  Projection projection;
  bool unique = false;
};

// Top-u eigenspace projection of a symmetric M; `unique` is true iff
// rank(M) >= u and the eigengap at position u is positive (relative
// tolerance 1e-10).
ModeResult projection_mode(const Eigen::MatrixXd& m, int u);

// Haar-uniform draw: column space of an iid standard normal r x u matrix.
Projection sample_uniform_projection(int r, int u, Rng& rng);

// Symmetric inverse square root of an SPD matrix via eigendecomposition.
Eigen::MatrixXd inv_sqrt_spd(const Eigen::MatrixXd& m);

}  // namespace rolem::grassmann

#endif  // ROLEM_GRASSMANN_HPP
