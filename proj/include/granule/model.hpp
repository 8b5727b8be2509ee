#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "granule/errors.hpp"
#include "granule/kinetics.hpp"
#include "granule/timeseries.hpp"

namespace granule {

/// Physical parameters of the granule model.
struct ModelParameters {
  std::size_t n = 1;           // microbial species
  std::size_t m = 1;           // dissolved substrates
  std::vector<double> rho;     // species densities, size n, > 0
  std::vector<double> D_S;     // substrate diffusivities, size m, > 0
  std::vector<double> D_Psi;   // planktonic diffusivities, size n, > 0
  std::vector<double> v_a;     // attachment velocities, size n, >= 0
  double delta = 0.0;          // detachment coefficient, >= 0

  /// Throws ConfigError on dimension mismatch or inadmissible values.
  void validate() const;
};

/// Prescribed bulk-liquid concentrations S*_j(t), Psi*_i(t).
struct BulkEnvironment {
  std::vector<TimeSeries> S_star;    // size m
  std::vector<TimeSeries> Psi_star;  // size n

  void validate(const ModelParameters& p, double horizon) const;
  std::vector<double> S_at(double t) const;
  std::vector<double> Psi_at(double t) const;
};

/// Attachment velocity sigma_a = sum_i v_a,i Psi*_i / rho_i.
double sigma_a(std::span<const double> psi_star, const ModelParameters& p);

/// Detachment velocity sigma_d = delta R^2.
double sigma_d(double R, const ModelParameters& p);

/// Interface sessile concentrations X_{i,0} = v_a,i Psi*_i rho_i / sum_k v_a,k Psi*_k.
/// The resulting volume fractions sum to 1 exactly. Throws StateError when the
/// attachment flux vanishes (no attaching biomass, boundary data undefined).
std::vector<double> boundary_fractions(std::span<const double> psi_star,
                                       const ModelParameters& p);

/// G = sum_i (r_M,i + r_i), from precomputed rates.
double growth_sum(std::span<const double> r_m, std::span<const double> r_plk);

/// G(X, S, Psi) evaluated through the kinetics model.
double growth_sum(std::span<const double> x, std::span<const double> s,
                  std::span<const double> psi, const KineticsModel& kin);

/// F_i = rho_i r_M,i + rho_i r_i - X_i G, from precomputed rates.
void transport_rhs(std::span<const double> x, std::span<const double> r_m,
                   std::span<const double> r_plk, double G,
                   const ModelParameters& p, std::span<double> out);

/// F(X, S, Psi) evaluated through the kinetics model.
std::vector<double> transport_rhs(std::span<const double> x, std::span<const double> s,
                                  std::span<const double> psi, const ModelParameters& p,
                                  const KineticsModel& kin);

/// Admissible box from parameters and bulk environment over [0, horizon]:
/// x in [0, max rho], s in [0, max_t S*], psi in [0, max_t Psi*].
AdmissibleBox admissible_box(const ModelParameters& p, const BulkEnvironment& bulk,
                             double horizon);

}  // namespace granule
