#pragma once

#include <functional>
#include <span>

#include "granule/model.hpp"

namespace granule {

enum class Regime { AttachmentOnly, General };

enum class BoundaryClassification { SpaceLike, TimeLike };

struct RegimeStatus {
  double sigma_a = 0.0;
  double sigma_d = 0.0;
  double net_flux = 0.0;  // sigma_a - sigma_d
  BoundaryClassification classification = BoundaryClassification::SpaceLike;
  double boundary_speed = 0.0;  // R-dot when known, else net flux
};

/// Classifies the free boundary: space-like iff sigma_a - sigma_d > 0.
RegimeStatus classify_regime(std::span<const double> psi_star, double R,
                             const ModelParameters& p, double u_boundary = 0.0);

/// One Heun step of the radius ODE,
///   R-dot = u(R, t) + sigma_a(t)            (attachment-only)
///   R-dot = u(R, t) + sigma_a(t) - delta R^2  (general).
/// In the general regime, throws RegimeExitError at entry when
/// sigma_a - sigma_d <= 0 (the model validity domain ends there).
double radius_step(double R, const std::function<double(double R, double t)>& u_boundary,
                   const BulkEnvironment& bulk, const ModelParameters& p, double t,
                   double dt, Regime regime);

}  // namespace granule
