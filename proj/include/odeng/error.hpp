#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace odeng {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: bad configuration values, out-of-domain arguments,
// unsupported criteria. The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::string key = {})
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  // Dotted config path of the offending value, empty when not applicable.
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : ValidationError(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnsupportedCriterionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Numerical failure during evaluation. The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularDesignError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateDensityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateDesignError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, double partial)
      : NumericalError(what), partial_(partial) {}

  double partial() const noexcept { return partial_; }

 private:
  double partial_;
};

class OptimizationFailedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace odeng
