#pragma once

#include <stdexcept>
#include <string>

namespace qqland {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value breaks a type invariant (Hermiticity, trace, positivity, weights).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace qqland
