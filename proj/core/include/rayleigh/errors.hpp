#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rayleigh {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad grid sizes, out-of-range parameters, unknown keys.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Two fields or operators built on different velocity grids were combined.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Right-hand side handed to the inverse operator has a macroscopic part.
class NotMicroscopic : public Error {
 public:
  NotMicroscopic(const std::string& what, double ratio) : Error(what), ratio_(ratio) {}
  double ratio() const { return ratio_; }

 private:
  double ratio_;
};

/// Operation not available for the chosen collision backend.
class BackendUnsupported : public Error {
 public:
  using Error::Error;
};

/// A dense matrix would exceed the configured byte budget.
class MemoryBudgetError : public Error {
 public:
  MemoryBudgetError(const std::string& what, std::size_t required, std::size_t budget)
      : Error(what), required_(required), budget_(budget) {}
  std::size_t required() const { return required_; }
  std::size_t budget() const { return budget_; }

 private:
  std::size_t required_;
  std::size_t budget_;
};

/// Domain errors, NaNs, unrealizable states and other failures during a computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Operator cache file is unreadable or fails its integrity check.
class CacheError : public Error {
 public:
  using Error::Error;
};

}  // namespace rayleigh
