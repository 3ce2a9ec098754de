#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace nonstatcov {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: non-finite entries, non-symmetric windows, bad shapes.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Parameters outside the domain of a closed-form bound.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is singular or too badly conditioned.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// A model violates its stability or positivity invariants.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Operation not available for a model family (e.g. closed-form SRE covariances).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A regression or decay fit has too little usable data.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Neumann expansion whose contraction factor is not below one.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double contraction)
      : Error(what), contraction_(contraction) {}

  double contraction() const noexcept { return contraction_; }

 private:
  double contraction_;
};

/// Configuration rejected by the schema; `pointer()` is a JSON pointer to the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string pointer, const std::string& what)
      : Error(pointer.empty() ? what : pointer + ": " + what), pointer_(std::move(pointer)) {}

  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace nonstatcov
