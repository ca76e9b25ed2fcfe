#pragma once

#include <stdexcept>
#include <string>

namespace homord {

/// Malformed input: bad tuples, arity mismatch, class constraint violations.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An enumeration or search would exceed its configured budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A builder could not reach the requested saturation within its size cap.
class SaturationInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace homord
