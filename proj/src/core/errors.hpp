#pragma once

#include <stdexcept>
#include <string>

namespace chemo {

// Raised when inputs violate a documented precondition or invariant.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a scheme or root finder fails at runtime (CFL violation,
// negative density, lost bracket, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chemo
