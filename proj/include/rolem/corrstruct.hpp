#ifndef ROLEM_CORRSTRUCT_HPP
#define ROLEM_CORRSTRUCT_HPP

#include <string>

#include <Eigen/Dense>

#include "rolem/errors.hpp"

namespace rolem::corr {

enum class Kind { Uncorrelated, CompoundSymmetry, Ar1 };

// rho is required to lie strictly inside (0, 1) for CS and AR(1); it is
// ignored for the uncorrelated structure.
struct Spec {
  Kind kind = Kind::Uncorrelated;
  double rho = 0.0;
};

struct InverseLogdet {
  Eigen::MatrixXd inverse;
  double log_det;
};

// J x J working correlation matrix R(rho).
Eigen::MatrixXd matrix(const Spec& spec, int j);

// Closed-form inverse and log-determinant (CS rank-one update, AR(1)
// tridiagonal); avoids a dense factorization inside the posterior sweeps.
InverseLogdet inverse_logdet(const Spec& spec, int j);

Kind parse_kind(const std::string& name);
std::string kind_name(Kind kind);

}  // namespace rolem::corr

#endif  // ROLEM_CORRSTRUCT_HPP
