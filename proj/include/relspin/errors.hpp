#pragma once

#include <stdexcept>
#include <string>

namespace relspin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An operator containing 1/|p| or 1/p^2 factors was evaluated at (or on a
/// state with weight at) the zero momentum mode.
class SingularMomentumError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf detected in a field.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Scenario/configuration problem. `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Krylov propagation failed to reach the requested tolerance.
class StepSizeError : public Error {
 public:
  StepSizeError(const std::string& message, double suggested_dt)
      : Error(message), suggested_dt_(suggested_dt) {}
  double suggested_dt() const noexcept { return suggested_dt_; }

 private:
  double suggested_dt_;
};

/// Too much norm reached the periodic boundary during a run.
class BoundaryFluxError : public Error {
 public:
  using Error::Error;
};

}  // namespace relspin
