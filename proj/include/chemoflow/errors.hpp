#pragma once

#include <stdexcept>
#include <string>

namespace chemoflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (s < 0, t >= T, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid user input: configuration fields, grid sizes, malformed files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A structural hypothesis of the blow-up construction does not hold.
class HypothesisError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical breakdown: non-finite values, exhausted retries, unstable steps.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace chemoflow
