#pragma once

#include <string>
#include <vector>

#include "granule/simulate.hpp"

namespace granule {

struct ValidationResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Built-in self checks. Suites: "analytic" (closed-form radius and substrate
/// solutions), "oracle" (quasi-static solves against an independent finite
/// difference solver), "invariants" (volume-fraction simplex, grid
/// monotonicity, center velocity), or "all".
std::vector<ValidationResult> run_validation(const std::string& suite);

}  // namespace granule
