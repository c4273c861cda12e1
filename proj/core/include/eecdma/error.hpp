#pragma once

#include <stdexcept>
#include <string>

namespace eecdma {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration value was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The system load leaves no feasible operating point (alpha >= 1 + 1/gamma,
/// or a fixed point/root that does not exist for the given inputs).
class InfeasibleLoad : public Error {
 public:
  using Error::Error;
};

/// A scalar root could not be bracketed or an iteration diverged.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace eecdma
