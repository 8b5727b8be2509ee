#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "granule/model.hpp"

namespace granule {

/// Characteristic update formulation. Direct steps c and dc/dt0 themselves;
/// Cubic steps c^3 and c^2 dc/dt0, which stays regular where c vanishes.
enum class Formulation { Direct, Cubic };

/// Lagrangian characteristic mesh. Node k was born at the free boundary at
/// time t0[k]; c[k] is its current position and q[k] = dc/dt0 at the node.
/// Node 0 is the center characteristic, c[0] = 0 for all time.
struct CharacteristicGrid {
  std::vector<double> t0;
  std::vector<double> c;
  std::vector<double> q;

  std::size_t size() const { return t0.size(); }

  /// Throws StateError on non-monotone positions (characteristic crossing)
  /// or non-positive dc/dt0 at interior nodes.
  void check_monotone() const;
};

/// Sessile/substrate/planktonic values sampled on the characteristic grid.
/// Layout: x[k*n + i], s[k*m + j], psi[k*n + i].
struct GranuleState {
  double t = 0.0;
  double R = 0.0;
  CharacteristicGrid grid;
  std::vector<double> x;
  std::vector<double> s;
  std::vector<double> psi;

  std::span<const double> x_at(std::size_t k, std::size_t n) const {
    return {x.data() + k * n, n};
  }
  std::span<const double> s_at(std::size_t k, std::size_t m) const {
    return {s.data() + k * m, m};
  }
  std::span<const double> psi_at(std::size_t k, std::size_t n) const {
    return {psi.data() + k * n, n};
  }
};

/// G at every grid node from the sampled fields.
std::vector<double> growth_profile(const GranuleState& state, const ModelParameters& p,
                                   const KineticsModel& kin);

/// Biomass velocity u at every node:
///   u_k = (1/c_k^2) int_0^{t0_k} c^2 G c_tau dtau,
/// evaluated segment-wise as int G d(c^3)/3 so the center limit u/c -> G/3 is
/// exact for constant G. u[0] = 0.
std::vector<double> velocity_profile(const CharacteristicGrid& grid,
                                     std::span<const double> G);

/// Velocity at a single node; throws StateError on a degenerate grid
/// (c_k = 0 for k >= 1).
double velocity_at(const CharacteristicGrid& grid, std::size_t k,
                   std::span<const double> G);

/// du/dr at the center, G(0)/3.
inline double center_velocity_gradient(double G_center) { return G_center / 3.0; }

/// Relative position threshold below which nodes use the center Taylor form.
inline constexpr double kCenterEps = 1e-6;

/// Heun predictor for positions and dc/dt0 over one step; returns the
/// predicted grid at t+dt. u and G are stage values on the input grid.
CharacteristicGrid grid_predict(const CharacteristicGrid& grid, std::span<const double> u,
                                std::span<const double> G, double R, double dt,
                                Formulation form);

/// Heun corrector combining stage-1 (old grid, u1, G1) and stage-2 (predicted
/// grid, u2, G2) derivatives.
CharacteristicGrid grid_correct(const CharacteristicGrid& grid,
                                const CharacteristicGrid& pred,
                                std::span<const double> u1, std::span<const double> G1,
                                std::span<const double> u2, std::span<const double> G2,
                                double R, double dt, Formulation form);

/// Advance characteristic positions and dc/dt0 by one Heun step. Stage-2
/// growth is evaluated on Heun-predicted sessile values with the substrate and
/// planktonic fields held at their time-t values (they are refreshed by the
/// quasi-static solves outside this call). Checks monotonicity afterwards.
CharacteristicGrid advance(const GranuleState& state, const ModelParameters& p,
                           const KineticsModel& kin, double dt, Formulation form);

/// Advance sessile concentrations along each characteristic by one Heun step
/// of dX_i/dt = F_i. The same ODE applies at the center node. Throws
/// StateError when a concentration leaves [0, rho_i] beyond tolerance.
/// When s2/psi2 (fields at t+dt, same node layout) are null the time-t fields
/// are reused for the corrector stage.
std::vector<double> advance_sessile(const GranuleState& state, const ModelParameters& p,
                                    const KineticsModel& kin, double dt,
                                    const std::vector<double>* s2 = nullptr,
                                    const std::vector<double>* psi2 = nullptr);

}  // namespace granule
