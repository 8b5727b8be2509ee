#include "granule/freeboundary.hpp"

#include <cmath>
#include <string>

namespace granule {

RegimeStatus classify_regime(std::span<const double> psi_star, double R,
                             const ModelParameters& p, double u_boundary) {
  RegimeStatus st;
  st.sigma_a = sigma_a(psi_star, p);
  st.sigma_d = sigma_d(R, p);
  st.net_flux = st.sigma_a - st.sigma_d;
  st.classification = st.net_flux > 0 ? BoundaryClassification::SpaceLike
                                      : BoundaryClassification::TimeLike;
  st.boundary_speed = u_boundary + st.net_flux;
  return st;
}

double radius_step(double R, const std::function<double(double R, double t)>& u_boundary,
                   const BulkEnvironment& bulk, const ModelParameters& p, double t,
                   double dt, Regime regime) {
  if (!(R >= 0)) throw StateError("radius_step: negative radius");
  auto rate = [&](double radius, double time) {
    double v = u_boundary(radius, time) + sigma_a(bulk.Psi_at(time), p);
    if (regime == Regime::General) v -= sigma_d(radius, p);
    return v;
  };
  if (regime == Regime::General) {
    double net = sigma_a(bulk.Psi_at(t), p) - sigma_d(R, p);
    if (!(net > 0))
      throw RegimeExitError("attachment regime ended: sigma_a - sigma_d = " +
                                std::to_string(net) + " at t = " + std::to_string(t),
                            t, R);
  }
  double k1 = rate(R, t);
  double k2 = rate(R + dt * k1, t + dt);
  return R + 0.5 * dt * (k1 + k2);
}

}  // namespace granule
