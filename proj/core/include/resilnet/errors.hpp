#pragma once

#include <stdexcept>
#include <string>

namespace resilnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid input: bad graph construction, schema violations,
/// out-of-range node labels.
class InputError : public Error {
 public:
  using Error::Error;
};

/// The operation needs a connected graph (finite effective resistances).
class DisconnectedError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be invertible was numerically singular.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// No allocation on the simplex reaches the requested spectral floor.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double attained_lambda2)
      : Error(what), attained_lambda2_(attained_lambda2) {}

  /// Largest algebraic connectivity the search reached, in the same units
  /// as the requested floor.
  double attained_lambda2() const { return attained_lambda2_; }

 private:
  double attained_lambda2_;
};

/// An iterative procedure failed to converge (e.g. no synchronized state).
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace resilnet
