#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace malnorm {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of the operands do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on the values of an input was violated.
class InputError : public Error {
 public:
  using Error::Error;
};

/// The input is (numerically) rank deficient.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// An iterative method hit its iteration cap. Carries the best estimate and
/// iterate reached so far.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double estimate,
                   std::vector<double> iterate = {})
      : Error(what), estimate_(estimate), iterate_(std::move(iterate)) {}

  double estimate() const noexcept { return estimate_; }
  const std::vector<double>& iterate() const noexcept { return iterate_; }

 private:
  double estimate_;
  std::vector<double> iterate_;
};

}  // namespace malnorm
