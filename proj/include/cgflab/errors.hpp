#pragma once

#include <stdexcept>
#include <string>

namespace cgflab {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid arguments, violated preconditions, malformed or missing input.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what) {}
};

// Numerical failure: divergent iteration, quadrature disagreement, singular
// or indefinite matrices where definiteness is required.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

// Model fit did not reach the required residual.  Carries the best residual
// achieved so callers can report how close the fit came.
class FitError : public NumericError {
 public:
  FitError(const std::string& what, double best_residual)
      : NumericError(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace cgflab
