#pragma once

#include <stdexcept>
#include <string>

namespace symfact {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: NaN/Inf entries, wrong shape, zero vectors, bad tolerances.
class ValidationError : public Error {
public:
  using Error::Error;
};

class DimensionError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// A linear system whose matrix is singular to working precision.
class SingularMatrixError : public Error {
public:
  using Error::Error;
};

class NotSymmetricError : public Error {
public:
  using Error::Error;
};

/// The operator has no complete eigenbasis (eigenvector matrix is singular
/// to working precision).
class DefectiveOperatorError : public Error {
public:
  using Error::Error;
};

/// Shifted QR or inverse iteration did not converge within its budget.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

}  // namespace symfact
