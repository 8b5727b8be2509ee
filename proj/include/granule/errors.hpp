#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace granule {

/// Invalid or inconsistent configuration (dimension mismatches, bad numerics
/// settings, unparsable config files). CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver failed to reach its tolerance. CLI exit code 3.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> residuals = {})
      : std::runtime_error(what), residual_history(std::move(residuals)) {}
  std::vector<double> residual_history;
};

/// A state invariant was violated during time stepping (characteristic
/// crossing, sessile concentration out of bounds, degenerate grid).
class StateError : public std::runtime_error {
 public:
  explicit StateError(const std::string& what) : std::runtime_error(what) {}
};

/// The general-regime radius update reached sigma_a - sigma_d <= 0, where the
/// model formulation ends. Carries the time and radius at exit. CLI exit code 4.
class RegimeExitError : public std::runtime_error {
 public:
  RegimeExitError(const std::string& what, double time, double radius)
      : std::runtime_error(what), t(time), R(radius) {}
  double t;
  double R;
};

}  // namespace granule
