#ifndef GEOMC_ERRORS_HPP
#define GEOMC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace geomc {

/// Base of every numerical failure a kernel may convert into a rejection.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Cholesky pivot fell at or below the positive-definiteness tolerance.
class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// NaN or infinity in a density, gradient or metric evaluation.
class NonFinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EigenFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// One of the (I +/- eps/2 Omega) systems of the Lagrangian leapfrog is singular.
class SingularUpdate : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateSet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroVariance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingReferenceSampler : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration; the message names the offending field.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A trace/reference/metrics file does not match the expected layout.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace geomc

#endif  // GEOMC_ERRORS_HPP
