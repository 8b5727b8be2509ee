#include "granule/kinetics.hpp"

#include <algorithm>
#include <cmath>

namespace granule {

MonodKinetics::MonodKinetics(MonodParameters p, AdmissibleBox box)
    : p_(std::move(p)), box_(box) {
  const std::size_t n = p_.mu_max.size();
  if (p_.K.size() != n || p_.k_col.size() != n || p_.rho.size() != n)
    throw ConfigError("Monod kinetics: per-species arrays must all have n entries");
  if (p_.growth_substrate.empty()) p_.growth_substrate.assign(n, 0);
  if (p_.growth_substrate.size() != n)
    throw ConfigError("Monod kinetics: growth_substrate must have n entries");
  if (p_.yield.size() % n != 0)
    throw ConfigError("Monod kinetics: yield must be an m x n matrix");
  m_ = p_.yield.size() / n;
  if (m_ == 0) throw ConfigError("Monod kinetics: empty yield matrix");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p_.K[i] > 0)) throw ConfigError("Monod kinetics: K must be positive");
    if (p_.growth_substrate[i] >= m_)
      throw ConfigError("Monod kinetics: growth_substrate index out of range");
  }
}

double MonodKinetics::clamp(double v, double hi) const {
  if (v < 0.0) {
    clamps_.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  if (v > hi) {
    clamps_.fetch_add(1, std::memory_order_relaxed);
    return hi;
  }
  return v;
}

double MonodKinetics::monod(double s, double K) const { return s / (K + s); }

void MonodKinetics::growth_rates(std::span<const double> x, std::span<const double> s,
                                 std::span<double> out) const {
  for (std::size_t i = 0; i < species(); ++i) {
    double xi = clamp(x[i], box_.x_max);
    double sg = clamp(s[p_.growth_substrate[i]], box_.s_max);
    out[i] = p_.mu_max[i] * monod(sg, p_.K[i]) * xi / p_.rho[i];
  }
}

void MonodKinetics::invasion_rates(std::span<const double> psi, std::span<const double> s,
                                   std::span<double> out) const {
  for (std::size_t i = 0; i < species(); ++i) {
    double pi = clamp(psi[i], box_.psi_max);
    double sg = clamp(s[p_.growth_substrate[i]], box_.s_max);
    out[i] = p_.k_col[i] * monod(sg, p_.K[i]) * pi / p_.rho[i];
  }
}

void MonodKinetics::substrate_rates(std::span<const double> x, std::span<const double> s,
                                    std::span<double> out) const {
  const std::size_t n = species();
  for (std::size_t j = 0; j < m_; ++j) {
    double sj = clamp(s[j], box_.s_max);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double xi = clamp(x[i], box_.x_max);
      acc += p_.yield[j * n + i] * p_.mu_max[i] * monod(sj, p_.K[i]) * xi;
    }
    out[j] = -acc;
  }
}

void MonodKinetics::planktonic_rates(std::span<const double> psi,
                                     std::span<const double> s,
                                     std::span<double> out) const {
  for (std::size_t i = 0; i < species(); ++i) {
    double pi = clamp(psi[i], box_.psi_max);
    double sg = clamp(s[p_.growth_substrate[i]], box_.s_max);
    out[i] = -p_.k_col[i] * monod(sg, p_.K[i]) * pi;
  }
}

std::optional<RateBounds> MonodKinetics::analytic_bounds() const {
  const std::size_t n = species();
  RateBounds b;
  b.M_growth.resize(n);
  b.lambda_growth.resize(n);
  b.M_invasion.resize(n);
  b.lambda_invasion.resize(n);
  b.M_planktonic.resize(n);
  b.lambda_planktonic.resize(n);
  b.M_substrate.resize(m_);
  b.lambda_substrate.resize(m_);
  for (std::size_t i = 0; i < n; ++i) {
    // theta = S/(K+S) on [0, s_max]: max value and max slope 1/K at S=0.
    double theta_max = monod(box_.s_max, p_.K[i]);
    b.M_growth[i] = p_.mu_max[i] * theta_max * box_.x_max / p_.rho[i];
    b.lambda_growth[i] =
        std::max(p_.mu_max[i] * theta_max / p_.rho[i],
                 p_.mu_max[i] * box_.x_max / (p_.rho[i] * p_.K[i]));
    b.M_invasion[i] = p_.k_col[i] * theta_max * box_.psi_max / p_.rho[i];
    b.lambda_invasion[i] =
        std::max(p_.k_col[i] * theta_max / p_.rho[i],
                 p_.k_col[i] * box_.psi_max / (p_.rho[i] * p_.K[i]));
    b.M_planktonic[i] = p_.k_col[i] * theta_max * box_.psi_max;
    b.lambda_planktonic[i] =
        std::max(p_.k_col[i] * theta_max, p_.k_col[i] * box_.psi_max / p_.K[i]);
  }
  for (std::size_t j = 0; j < m_; ++j) {
    double M = 0.0, lam_x = 0.0, lam_s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double y = p_.yield[j * n + i];
      double theta_max = monod(box_.s_max, p_.K[i]);
      M += y * p_.mu_max[i] * theta_max * box_.x_max;
      lam_x = std::max(lam_x, y * p_.mu_max[i] * theta_max);
      lam_s += y * p_.mu_max[i] * box_.x_max / p_.K[i];
    }
    b.M_substrate[j] = M;
    b.lambda_substrate[j] = std::max(lam_x, lam_s);
  }
  return b;
}

}  // namespace granule
