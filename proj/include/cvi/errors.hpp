#pragma once

#include <stdexcept>
#include <string>

namespace cvi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A base point does not satisfy the constraint to the required tolerance.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Degenerate geometric input: zero vector to normalize, rank-deficient QR,
/// antipodal transport, non-positive time coordinate.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Newton iteration failed; carries the last residual norm and iteration count.
class NewtonError : public Error {
 public:
  NewtonError(const std::string& what, double residual, int iterations)
      : Error(what + " (residual " + std::to_string(residual) + " after " +
              std::to_string(iterations) + " iterations)"),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Newton Jacobian is singular (rank-revealing factorization lost rank).
class SingularJacobian : public NewtonError {
 public:
  using NewtonError::NewtonError;
};

}  // namespace cvi
