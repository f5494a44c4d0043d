#include "rolem/corrstruct.hpp"

#include <cmath>
#include <cstdlib>

namespace rolem::corr {

namespace {

void check_spec(const Spec& spec, int j) {
  if (j < 1) throw InvalidParameterError("correlation dimension must be >= 1");
  if (spec.kind != Kind::Uncorrelated &&
      !(spec.rho > 0.0 && spec.rho < 1.0))
    throw InvalidParameterError("rho must lie strictly inside (0, 1)");
}

}  // namespace

Eigen::MatrixXd matrix(const Spec& spec, int j) {
  check_spec(spec, j);
  if (j == 1 || spec.kind == Kind::Uncorrelated)
    return Eigen::MatrixXd::Identity(j, j);
  Eigen::MatrixXd r(j, j);
  if (spec.kind == Kind::CompoundSymmetry) {
    r.setConstant(spec.rho);
    r.diagonal().setOnes();
  } else {
    for (int s = 0; s < j; ++s)
      for (int l = 0; l < j; ++l) r(s, l) = std::pow(spec.rho, std::abs(s - l));
  }
  return r;
}

InverseLogdet inverse_logdet(const Spec& spec, int j) {
  check_spec(spec, j);
  if (j == 1 || spec.kind == Kind::Uncorrelated)
    return {Eigen::MatrixXd::Identity(j, j), 0.0};

  const double rho = spec.rho;
  if (spec.kind == Kind::CompoundSymmetry) {
    const double tail = 1.0 + (j - 1) * rho;
    Eigen::MatrixXd inv =
        Eigen::MatrixXd::Constant(j, j, -rho / ((1.0 - rho) * tail));
    inv.diagonal().array() += 1.0 / (1.0 - rho);
    const double log_det = (j - 1) * std::log1p(-rho) + std::log(tail);
    return {inv, log_det};
  }

  // AR(1) tridiagonal inverse.
  const double scale = 1.0 / (1.0 - rho * rho);
  Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(j, j);
  for (int s = 0; s < j; ++s) {
    const bool interior = s > 0 && s < j - 1;
    inv(s, s) = scale * (interior ? 1.0 + rho * rho : 1.0);
    if (s + 1 < j) {
      inv(s, s + 1) = -scale * rho;
      inv(s + 1, s) = -scale * rho;
    }
  }
  const double log_det = (j - 1) * std::log1p(-rho * rho);
  return {inv, log_det};
}

Kind parse_kind(const std::string& name) {
  if (name == "uncor") return Kind::Uncorrelated;
  if (name == "cs") return Kind::CompoundSymmetry;
  if (name == "ar1") return Kind::Ar1;
  throw InvalidParameterError("unknown correlation kind: " + name);
}

std::string kind_name(Kind kind) {
  switch (kind) {
    case Kind::Uncorrelated: return "uncor";
    case Kind::CompoundSymmetry: return "cs";
    case Kind::Ar1: return "ar1";
  }
  throw InvalidParameterError("unknown correlation kind");
}

}  // namespace rolem::corr
