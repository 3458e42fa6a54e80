#pragma once

#include <stdexcept>
#include <string>

namespace phdae {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A callback produced a non-finite or malformed value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A standing assumption of the model failed numerically (rank drop,
/// indefinite momentum Hessian, singular multiplier matrix).
class AssumptionError : public Error {
 public:
  using Error::Error;
};

/// The operation requires structure the system does not declare
/// (e.g. a separable Hamiltonian).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// An iterative solve diverged or ran out of iterations.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double last_residual, int iterations)
      : Error(what), last_residual(last_residual), iterations(iterations) {}

  double last_residual;
  int iterations;
};

/// A state handed to the integrator violates the constraint manifold.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// Malformed run configuration or input file; line is 1-based, 0 if unknown.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line(line) {}

  int line;
};

}  // namespace phdae
