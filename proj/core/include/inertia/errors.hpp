#pragma once

#include <stdexcept>
#include <string>

namespace inertia {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid model input: bad weights, non-positive inertia, disconnected graph, ...
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to meet its tolerance. Carries the residual.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// The feasible set of an allocation problem is empty.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Scenario file problems. `path` is the JSON field path (semantic errors)
/// or "line L, column C" (parse errors).
class ScenarioError : public Error {
 public:
  ScenarioError(const std::string& what, std::string path)
      : Error(what + " (at " + path + ")"), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace inertia
