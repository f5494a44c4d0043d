#ifndef ROLEM_ERRORS_HPP
#define ROLEM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rolem {

// Invalid distribution/model parameters (non-SPD covariance, bad dof, ...).
class InvalidParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown during sampling or factorization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Near-singular U1' * Gamma in the A-parameterization; the caller should
// pick a different reference frame and restart.
class FrameError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Malformed input files (schema, duplicates, non-numeric cells).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rolem

#endif  // ROLEM_ERRORS_HPP
