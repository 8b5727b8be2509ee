#pragma once

#include <atomic>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "granule/errors.hpp"

namespace granule {

/// Admissible state box on which the rate functions are bounded and Lipschitz.
/// Rates are evaluated on inputs clamped into this box; clamping events are
/// counted per kinetics instance.
struct AdmissibleBox {
  double x_max = 1.0;    // sessile concentrations in [0, x_max]
  double s_max = 1.0;    // substrates in [0, s_max]
  double psi_max = 1.0;  // planktonic concentrations in [0, psi_max]
};

/// Documented bound M and Lipschitz constant lambda for one rate family,
/// valid on the admissible box.
struct RateBounds {
  std::vector<double> M_growth, lambda_growth;        // r_M,i
  std::vector<double> M_invasion, lambda_invasion;    // r_i
  std::vector<double> M_substrate, lambda_substrate;  // r_S,j
  std::vector<double> M_planktonic, lambda_planktonic;  // r_Psi,i
};

/// Reaction-rate interface. Implementations must be stateless apart from the
/// clamp diagnostic counter, so instances can be shared across threads.
class KineticsModel {
 public:
  virtual ~KineticsModel() = default;

  virtual std::size_t species() const = 0;
  virtual std::size_t substrates() const = 0;

  /// Specific sessile growth rates r_M,i(X, S), 1/time. r_M,i = 0 when X_i = 0.
  virtual void growth_rates(std::span<const double> x, std::span<const double> s,
                            std::span<double> out) const = 0;
  /// Invasion growth rates r_i(Psi, S), 1/time.
  virtual void invasion_rates(std::span<const double> psi, std::span<const double> s,
                              std::span<double> out) const = 0;
  /// Substrate conversion rates r_S,j(X, S), mass/volume/time (<= 0 for consumption).
  virtual void substrate_rates(std::span<const double> x, std::span<const double> s,
                               std::span<double> out) const = 0;
  /// Planktonic conversion rates r_Psi,i(Psi, S), mass/volume/time.
  virtual void planktonic_rates(std::span<const double> psi, std::span<const double> s,
                                std::span<double> out) const = 0;

  virtual const AdmissibleBox& box() const = 0;

  /// Analytic per-rate bounds when the model can provide them; used for
  /// diagnostics and verification, not required.
  virtual std::optional<RateBounds> analytic_bounds() const { return std::nullopt; }

  virtual long clamp_count() const { return 0; }
};

/// Per-species Monod coefficients for the reference kinetics.
struct MonodParameters {
  std::vector<double> mu_max;  // maximum specific growth rate, 1/time
  std::vector<double> K;       // half-saturation constant per species
  std::vector<double> k_col;   // colonization (invasion) rate constant, 1/time
  std::vector<std::size_t> growth_substrate;  // 0-based substrate index per species
  std::vector<double> yield;   // Y[j*n + i], substrate j consumed per species i
  std::vector<double> rho;     // species densities (shared with ModelParameters)
};

/// Reference Monod kinetics:
///   r_M,i   =  mu_max,i * S_g(i)/(K_i + S_g(i)) * X_i / rho_i
///   r_i     =  k_col,i  * S_g(i)/(K_i + S_g(i)) * Psi_i / rho_i
///   r_S,j   = -sum_i Y_{j,i} mu_max,i * S_j/(K_i + S_j) * X_i
///   r_Psi,i = -k_col,i * S_g(i)/(K_i + S_g(i)) * Psi_i
class MonodKinetics final : public KineticsModel {
 public:
  MonodKinetics(MonodParameters p, AdmissibleBox box);

  std::size_t species() const override { return p_.mu_max.size(); }
  std::size_t substrates() const override { return m_; }

  void growth_rates(std::span<const double> x, std::span<const double> s,
                    std::span<double> out) const override;
  void invasion_rates(std::span<const double> psi, std::span<const double> s,
                      std::span<double> out) const override;
  void substrate_rates(std::span<const double> x, std::span<const double> s,
                       std::span<double> out) const override;
  void planktonic_rates(std::span<const double> psi, std::span<const double> s,
                        std::span<double> out) const override;

  const AdmissibleBox& box() const override { return box_; }
  std::optional<RateBounds> analytic_bounds() const override;
  long clamp_count() const override { return clamps_.load(); }

 private:
  double clamp(double v, double hi) const;
  double monod(double s, double K) const;

  MonodParameters p_;
  AdmissibleBox box_;
  std::size_t m_;
  mutable std::atomic<long> clamps_{0};
};

}  // namespace granule
