#include "granule/characteristics.hpp"

#include <cmath>
#include <string>

namespace granule {

namespace {

double cube(double v) { return v * v * v; }

// Prefix integrals P_k = int_0^{t0_k} c^2 G c_tau dtau, evaluated as
// trapezoid in the variable c^3/3 (exact for constant G and regular at the
// center, where the plain tau-trapezoid loses the c^2 ~ tau^2 weight).
std::vector<double> growth_prefix(std::span<const double> c, std::span<const double> G) {
  std::vector<double> P(c.size(), 0.0);
  for (std::size_t k = 1; k < c.size(); ++k)
    P[k] = P[k - 1] + 0.5 * (G[k - 1] + G[k]) * (cube(c[k]) - cube(c[k - 1])) / 3.0;
  return P;
}

// u_k / c_k with the center Taylor limit G/3 below the eps threshold.
double velocity_ratio(double c_k, double prefix_k, double G_center, double scale) {
  if (c_k <= kCenterEps * scale) return G_center / 3.0;
  return prefix_k / (c_k * c_k * c_k);
}

}  // namespace

void CharacteristicGrid::check_monotone() const {
  for (std::size_t k = 1; k < size(); ++k) {
    if (!(c[k] > c[k - 1]))
      throw StateError("characteristic crossing detected at node " + std::to_string(k) +
                       " (c=" + std::to_string(c[k]) + "); reduce dt");
    if (!(q[k] > 0.0))
      throw StateError("dc/dt0 became non-positive at node " + std::to_string(k) +
                       "; reduce dt");
  }
}

std::vector<double> growth_profile(const GranuleState& state, const ModelParameters& p,
                                   const KineticsModel& kin) {
  const std::size_t K = state.grid.size();
  std::vector<double> G(K), rm(p.n), rp(p.n);
  for (std::size_t k = 0; k < K; ++k) {
    kin.growth_rates(state.x_at(k, p.n), state.s_at(k, p.m), rm);
    kin.invasion_rates(state.psi_at(k, p.n), state.s_at(k, p.m), rp);
    G[k] = growth_sum(rm, rp);
  }
  return G;
}

std::vector<double> velocity_profile(const CharacteristicGrid& grid,
                                     std::span<const double> G) {
  const std::size_t K = grid.size();
  std::vector<double> u(K, 0.0);
  if (K == 0) return u;
  auto P = growth_prefix(grid.c, G);
  const double scale = grid.c.back();
  for (std::size_t k = 1; k < K; ++k) {
    if (grid.c[k] <= 0.0)
      throw StateError("degenerate grid: c=0 at interior node " + std::to_string(k));
    u[k] = grid.c[k] * velocity_ratio(grid.c[k], P[k], G[0], scale);
  }
  return u;
}

double velocity_at(const CharacteristicGrid& grid, std::size_t k,
                   std::span<const double> G) {
  return velocity_profile(grid, G)[k];
}

CharacteristicGrid grid_predict(const CharacteristicGrid& grid, std::span<const double> u,
                                std::span<const double> G, double R, double dt,
                                Formulation form) {
  const std::size_t K = grid.size();
  CharacteristicGrid out = grid;
  const double scale = std::max(R, grid.c.empty() ? 0.0 : grid.c.back());
  for (std::size_t k = 0; k < K; ++k) {
    const double c_k = grid.c[k];
    const double ratio = (k == 0) ? G[0] / 3.0
                                  : (c_k <= kCenterEps * scale ? G[0] / 3.0 : u[k] / c_k);
    if (form == Formulation::Direct || k == 0) {
      out.c[k] = (k == 0) ? 0.0 : c_k + dt * u[k];
      out.q[k] = grid.q[k] + dt * (G[k] - 2.0 * ratio) * grid.q[k];
    } else {
      out.c[k] = std::cbrt(cube(c_k) + dt * 3.0 * u[k] * c_k * c_k);
      const double w = c_k * c_k * grid.q[k] + dt * G[k] * c_k * c_k * grid.q[k];
      if (out.c[k] <= kCenterEps * scale)
        out.q[k] = grid.q[k] + dt * (G[k] - 2.0 * ratio) * grid.q[k];
      else
        out.q[k] = w / (out.c[k] * out.c[k]);
    }
  }
  return out;
}

CharacteristicGrid grid_correct(const CharacteristicGrid& grid,
                                const CharacteristicGrid& pred,
                                std::span<const double> u1, std::span<const double> G1,
                                std::span<const double> u2, std::span<const double> G2,
                                double R, double dt, Formulation form) {
  const std::size_t K = grid.size();
  CharacteristicGrid out = grid;
  const double scale = std::max(R, grid.c.empty() ? 0.0 : grid.c.back());
  for (std::size_t k = 0; k < K; ++k) {
    const double c1 = grid.c[k], c2 = pred.c[k];
    const double r1 = (k == 0 || c1 <= kCenterEps * scale) ? G1[0] / 3.0 : u1[k] / c1;
    const double r2 = (k == 0 || c2 <= kCenterEps * scale) ? G2[0] / 3.0 : u2[k] / c2;
    if (form == Formulation::Direct || k == 0) {
      out.c[k] = (k == 0) ? 0.0 : c1 + 0.5 * dt * (u1[k] + u2[k]);
      out.q[k] = grid.q[k] + 0.5 * dt * ((G1[k] - 2.0 * r1) * grid.q[k] +
                                         (G2[k] - 2.0 * r2) * pred.q[k]);
    } else {
      out.c[k] = std::cbrt(cube(c1) + 0.5 * dt * (3.0 * u1[k] * c1 * c1 +
                                                  3.0 * u2[k] * c2 * c2));
      const double w_new = c1 * c1 * grid.q[k] +
                           0.5 * dt * (G1[k] * c1 * c1 * grid.q[k] +
                                       G2[k] * c2 * c2 * pred.q[k]);
      if (out.c[k] <= kCenterEps * scale)
        out.q[k] = grid.q[k] + 0.5 * dt * ((G1[k] - 2.0 * r1) * grid.q[k] +
                                           (G2[k] - 2.0 * r2) * pred.q[k]);
      else
        out.q[k] = w_new / (out.c[k] * out.c[k]);
    }
  }
  return out;
}

CharacteristicGrid advance(const GranuleState& state, const ModelParameters& p,
                           const KineticsModel& kin, double dt, Formulation form) {
  if (!(dt > 0)) throw ConfigError("advance: dt must be positive");
  auto G1 = growth_profile(state, p, kin);
  auto u1 = velocity_profile(state.grid, G1);
  auto pred = grid_predict(state.grid, u1, G1, state.R, dt, form);

  // Stage-2 growth on Heun-predicted sessile values; s, psi lag one stage.
  GranuleState stage2 = state;
  stage2.grid = pred;
  const std::size_t K = state.grid.size();
  for (std::size_t k = 0; k < K; ++k) {
    auto Fk = transport_rhs(state.x_at(k, p.n), state.s_at(k, p.m),
                            state.psi_at(k, p.n), p, kin);
    for (std::size_t i = 0; i < p.n; ++i)
      stage2.x[k * p.n + i] = state.x[k * p.n + i] + dt * Fk[i];
  }
  auto G2 = growth_profile(stage2, p, kin);
  auto u2 = velocity_profile(pred, G2);

  auto out = grid_correct(state.grid, pred, u1, G1, u2, G2, state.R, dt, form);
  out.check_monotone();
  return out;
}

std::vector<double> advance_sessile(const GranuleState& state, const ModelParameters& p,
                                    const KineticsModel& kin, double dt,
                                    const std::vector<double>* s2,
                                    const std::vector<double>* psi2) {
  const std::size_t K = state.grid.size();
  const std::size_t n = p.n, m = p.m;
  std::vector<double> out(state.x.size());
  std::vector<double> xs(n);
  for (std::size_t k = 0; k < K; ++k) {
    auto F1 = transport_rhs(state.x_at(k, n), state.s_at(k, m), state.psi_at(k, n), p, kin);
    for (std::size_t i = 0; i < n; ++i) xs[i] = state.x[k * n + i] + dt * F1[i];
    std::span<const double> s_k = s2 ? std::span<const double>{s2->data() + k * m, m}
                                     : state.s_at(k, m);
    std::span<const double> psi_k = psi2
                                        ? std::span<const double>{psi2->data() + k * n, n}
                                        : state.psi_at(k, n);
    auto F2 = transport_rhs(xs, s_k, psi_k, p, kin);
    for (std::size_t i = 0; i < n; ++i) {
      double v = state.x[k * n + i] + 0.5 * dt * (F1[i] + F2[i]);
      const double tol = 1e-7 * p.rho[i];
      if (v < -tol || v > p.rho[i] + tol)
        throw StateError("sessile concentration left [0, rho] at node " +
                         std::to_string(k) + ", species " + std::to_string(i));
      out[k * n + i] = v;
    }
  }
  return out;
}

}  // namespace granule
