#include "granule/model.hpp"

#include <algorithm>
#include <cmath>

namespace granule {

void ModelParameters::validate() const {
  if (n < 1 || m < 1) throw ConfigError("species and substrate counts must be >= 1");
  if (rho.size() != n) throw ConfigError("rho must have n entries");
  if (D_S.size() != m) throw ConfigError("D_S must have m entries");
  if (D_Psi.size() != n) throw ConfigError("D_Psi must have n entries");
  if (v_a.size() != n) throw ConfigError("v_a must have n entries");
  for (double r : rho)
    if (!(r > 0)) throw ConfigError("densities must be positive");
  for (double d : D_S)
    if (!(d > 0)) throw ConfigError("substrate diffusivities must be positive");
  for (double d : D_Psi)
    if (!(d > 0)) throw ConfigError("planktonic diffusivities must be positive");
  for (double v : v_a)
    if (!(v >= 0)) throw ConfigError("attachment velocities must be >= 0");
  if (std::all_of(v_a.begin(), v_a.end(), [](double v) { return v == 0.0; }))
    throw ConfigError("at least one attachment velocity must be positive");
  if (!(delta >= 0)) throw ConfigError("detachment coefficient must be >= 0");
}

void BulkEnvironment::validate(const ModelParameters& p, double horizon) const {
  if (S_star.size() != p.m) throw ConfigError("bulk S* must have m entries");
  if (Psi_star.size() != p.n) throw ConfigError("bulk Psi* must have n entries");
  for (const auto& ts : S_star)
    if (ts.min_over(0.0, horizon) < 0.0)
      throw ConfigError("bulk substrate concentrations must stay non-negative");
  for (const auto& ts : Psi_star)
    if (ts.min_over(0.0, horizon) < 0.0)
      throw ConfigError("bulk planktonic concentrations must stay non-negative");
}

std::vector<double> BulkEnvironment::S_at(double t) const {
  std::vector<double> out(S_star.size());
  for (std::size_t j = 0; j < S_star.size(); ++j) out[j] = S_star[j](t);
  return out;
}

std::vector<double> BulkEnvironment::Psi_at(double t) const {
  std::vector<double> out(Psi_star.size());
  for (std::size_t i = 0; i < Psi_star.size(); ++i) out[i] = Psi_star[i](t);
  return out;
}

double sigma_a(std::span<const double> psi_star, const ModelParameters& p) {
  if (psi_star.size() != p.n) throw ConfigError("sigma_a: Psi* dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) acc += p.v_a[i] * psi_star[i] / p.rho[i];
  return acc;
}

double sigma_d(double R, const ModelParameters& p) { return p.delta * R * R; }

std::vector<double> boundary_fractions(std::span<const double> psi_star,
                                       const ModelParameters& p) {
  if (psi_star.size() != p.n)
    throw ConfigError("boundary_fractions: Psi* dimension mismatch");
  double flux = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) flux += p.v_a[i] * psi_star[i];
  if (!(flux > 0.0))
    throw StateError("no attaching biomass: boundary condition undefined");
  std::vector<double> out(p.n);
  for (std::size_t i = 0; i < p.n; ++i)
    out[i] = p.v_a[i] * psi_star[i] / flux * p.rho[i];
  return out;
}

double growth_sum(std::span<const double> r_m, std::span<const double> r_plk) {
  double g = 0.0;
  for (std::size_t i = 0; i < r_m.size(); ++i) g += r_m[i] + r_plk[i];
  return g;
}

double growth_sum(std::span<const double> x, std::span<const double> s,
                  std::span<const double> psi, const KineticsModel& kin) {
  std::vector<double> rm(kin.species()), rp(kin.species());
  kin.growth_rates(x, s, rm);
  kin.invasion_rates(psi, s, rp);
  return growth_sum(rm, rp);
}

void transport_rhs(std::span<const double> x, std::span<const double> r_m,
                   std::span<const double> r_plk, double G,
                   const ModelParameters& p, std::span<double> out) {
  for (std::size_t i = 0; i < p.n; ++i)
    out[i] = p.rho[i] * (r_m[i] + r_plk[i]) - x[i] * G;
}

std::vector<double> transport_rhs(std::span<const double> x, std::span<const double> s,
                                  std::span<const double> psi, const ModelParameters& p,
                                  const KineticsModel& kin) {
  std::vector<double> rm(p.n), rp(p.n), out(p.n);
  kin.growth_rates(x, s, rm);
  kin.invasion_rates(psi, s, rp);
  transport_rhs(x, rm, rp, growth_sum(rm, rp), p, out);
  return out;
}

AdmissibleBox admissible_box(const ModelParameters& p, const BulkEnvironment& bulk,
                             double horizon) {
  AdmissibleBox box;
  box.x_max = *std::max_element(p.rho.begin(), p.rho.end());
  box.s_max = 0.0;
  for (const auto& ts : bulk.S_star) box.s_max = std::max(box.s_max, ts.max_over(0, horizon));
  box.psi_max = 0.0;
  for (const auto& ts : bulk.Psi_star)
    box.psi_max = std::max(box.psi_max, ts.max_over(0, horizon));
  return box;
}

}  // namespace granule
