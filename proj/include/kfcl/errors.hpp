#pragma once

#include <stdexcept>
#include <string>

namespace kfcl {

// Caller supplied something outside an operation's contract (bad k, parity
// mismatch, non-primitive character where one is required, out-of-range x).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data is missing, malformed, or inconsistent (zero files, caches,
// upstream artifacts).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An analytic evaluation could not meet its accuracy or convergence target.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluation point sits on (or numerically at) a pole.
class PoleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Requested sieve or series is larger than what the process can address.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace kfcl
