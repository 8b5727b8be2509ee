#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "granule/characteristics.hpp"
#include "granule/model.hpp"

namespace granule {

struct EllipticOptions {
  double tol = 1e-8;        // relative successive-iterate tolerance
  int max_iter = 200;
  double damping = 0.5;     // Picard damping factor
  // Test hook: scales the inner quadrature segments; anything != 1 breaks the
  // solve on purpose (fault-injection in the validate oracle suite).
  double debug_quadrature_scale = 1.0;
};

struct EllipticSolveReport {
  int iterations = 0;
  double residual = 0.0;  // max-norm successive-iterate difference, relative
  long clamped = 0;       // negativity clamps inside rate evaluations
  bool converged = true;
};

/// Reaction callback: rates for all fields at one node given the current
/// iterate values of the solved fields at that node.
using ReactionFn =
    std::function<void(std::size_t node, std::span<const double> field_values,
                       std::span<double> rates)>;

/// Solves the quasi-static spherical reaction-diffusion problems on the
/// characteristic grid in nested-integral form:
///   y_f(t0_k) = dirichlet_f + (1/D_f) int_{t0_k}^{t} (c_theta / c^2)
///               [ int_0^theta c^2 r_f c_tau dtau ] dtheta,
/// with damped Picard on the self-dependence of the rates. The quadrature
/// integrates in birth time, so grid.q must be the true Jacobian dc/dt0 of
/// grid.c (for a synthetic grid c = R t0 that means q = R, not 1). `field` is
/// the warm start and the result, layout field[k*nf + f]. Grids with fewer than 3
/// nodes get the Dirichlet values (zero-volume granule limit).
/// Throws NonConvergenceError with the residual history on failure.
EllipticSolveReport solve_elliptic(const CharacteristicGrid& grid,
                                   std::span<const double> D,
                                   std::span<const double> dirichlet,
                                   const ReactionFn& rates, std::vector<double>& field,
                                   const EllipticOptions& opt = {});

/// Substrate solve: s_j on the grid with Dirichlet values S*_j(t) and rates
/// r_S,j(X, s). `s` is warm start and result.
EllipticSolveReport solve_substrates(const GranuleState& state, const ModelParameters& p,
                                     const KineticsModel& kin,
                                     std::span<const double> S_star,
                                     std::vector<double>& s,
                                     const EllipticOptions& opt = {});

/// Planktonic solve: psi_i with Dirichlet values Psi*_i(t) and rates
/// r_Psi,i(psi, S); the substrate field is taken from `state`.
EllipticSolveReport solve_planktonic(const GranuleState& state, const ModelParameters& p,
                                     const KineticsModel& kin,
                                     std::span<const double> Psi_star,
                                     std::vector<double>& psi,
                                     const EllipticOptions& opt = {});

struct FdOracleOptions {
  int max_iter = 100;
  double tol = 1e-12;
};

/// Verification oracle: second-order conservative finite differences for
///   -D (1/r^2)(r^2 y')' = f(y, r),  y'(0) = 0,  y(R) = dirichlet,
/// on a uniform mesh of n_intervals cells, solved by damped Newton with a
/// tridiagonal Jacobian. Returns y at the n_intervals+1 mesh points.
std::vector<double> fd_oracle(std::size_t n_intervals, double R, double D,
                              double dirichlet,
                              const std::function<double(double y, double r)>& f,
                              const FdOracleOptions& opt = {});

}  // namespace granule
