#include "granule/elliptic.hpp"

#include <algorithm>
#include <cmath>

namespace granule {

namespace {

double cube(double v) { return v * v * v; }

// One evaluation of the nested-integral map for all fields at once.
void evaluate_map(const CharacteristicGrid& grid, std::span<const double> D,
                  std::span<const double> dirichlet, const ReactionFn& rates,
                  const std::vector<double>& field, const EllipticOptions& opt,
                  std::vector<double>& rate_buf, std::vector<double>& prefix,
                  std::vector<double>& integrand, std::vector<double>& out) {
  const std::size_t K = grid.size();
  const std::size_t nf = D.size();
  const double R = grid.c.back();

  for (std::size_t k = 0; k < K; ++k)
    rates(k, {field.data() + k * nf, nf}, {rate_buf.data() + k * nf, nf});

  for (std::size_t f = 0; f < nf; ++f) {
    // Inner integral int_0^{t0_k} c^2 r c_tau dtau as trapezoid in c^3/3.
    prefix[0] = 0.0;
    for (std::size_t k = 1; k < K; ++k)
      prefix[k] = prefix[k - 1] + opt.debug_quadrature_scale * 0.5 *
                                      (rate_buf[(k - 1) * nf + f] + rate_buf[k * nf + f]) *
                                      (cube(grid.c[k]) - cube(grid.c[k - 1])) / 3.0;
    // Outer integrand (c_theta / c^2) * inner; Taylor form q r c / 3 near the
    // center where the ratio is 0/0.
    for (std::size_t k = 0; k < K; ++k) {
      const double c_k = grid.c[k];
      if (c_k <= kCenterEps * R)
        integrand[k] = grid.q[k] * rate_buf[k * nf + f] * c_k / 3.0;
      else
        integrand[k] = grid.q[k] * prefix[k] / (c_k * c_k);
    }
    // Suffix trapezoid from t0_k to the boundary.
    double acc = 0.0;
    out[(K - 1) * nf + f] = dirichlet[f];
    for (std::size_t k = K - 1; k-- > 0;) {
      acc += 0.5 * (integrand[k] + integrand[k + 1]) * (grid.t0[k + 1] - grid.t0[k]);
      out[k * nf + f] = dirichlet[f] + acc / D[f];
    }
  }
}

}  // namespace

EllipticSolveReport solve_elliptic(const CharacteristicGrid& grid,
                                   std::span<const double> D,
                                   std::span<const double> dirichlet,
                                   const ReactionFn& rates, std::vector<double>& field,
                                   const EllipticOptions& opt) {
  const std::size_t K = grid.size();
  const std::size_t nf = D.size();
  EllipticSolveReport report;

  if (K < 3) {
    // Zero-volume granule: the nested integral vanishes, bulk values hold.
    field.assign(K * nf, 0.0);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t f = 0; f < nf; ++f) field[k * nf + f] = dirichlet[f];
    return report;
  }

  if (field.size() != K * nf) {
    field.assign(K * nf, 0.0);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t f = 0; f < nf; ++f) field[k * nf + f] = dirichlet[f];
  }

  std::vector<double> scale(nf);
  for (std::size_t f = 0; f < nf; ++f) scale[f] = std::max(std::abs(dirichlet[f]), 1e-30);

  std::vector<double> rate_buf(K * nf), prefix(K), integrand(K), mapped(K * nf);
  std::vector<double> history;
  for (int it = 1; it <= opt.max_iter; ++it) {
    evaluate_map(grid, D, dirichlet, rates, field, opt, rate_buf, prefix, integrand,
                 mapped);
    double resid = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t f = 0; f < nf; ++f)
        resid = std::max(resid, std::abs(mapped[k * nf + f] - field[k * nf + f]) / scale[f]);
    for (std::size_t idx = 0; idx < field.size(); ++idx)
      field[idx] = (1.0 - opt.damping) * field[idx] + opt.damping * mapped[idx];
    report.iterations = it;
    report.residual = resid;
    history.push_back(resid);
    if (resid <= opt.tol) {
      field = mapped;  // land on the exact map value, not the damped average
      return report;
    }
  }
  report.converged = false;
  throw NonConvergenceError("elliptic solve did not converge in " +
                                std::to_string(opt.max_iter) + " iterations (residual " +
                                std::to_string(report.residual) + ")",
                            std::move(history));
}

EllipticSolveReport solve_substrates(const GranuleState& state, const ModelParameters& p,
                                     const KineticsModel& kin,
                                     std::span<const double> S_star,
                                     std::vector<double>& s, const EllipticOptions& opt) {
  long clamps_before = kin.clamp_count();
  auto reaction = [&](std::size_t k, std::span<const double> s_iter,
                      std::span<double> out) {
    kin.substrate_rates(state.x_at(k, p.n), s_iter, out);
  };
  auto report = solve_elliptic(state.grid, p.D_S, S_star, reaction, s, opt);
  report.clamped = kin.clamp_count() - clamps_before;
  return report;
}

EllipticSolveReport solve_planktonic(const GranuleState& state, const ModelParameters& p,
                                     const KineticsModel& kin,
                                     std::span<const double> Psi_star,
                                     std::vector<double>& psi,
                                     const EllipticOptions& opt) {
  long clamps_before = kin.clamp_count();
  auto reaction = [&](std::size_t k, std::span<const double> psi_iter,
                      std::span<double> out) {
    kin.planktonic_rates(psi_iter, state.s_at(k, p.m), out);
  };
  auto report = solve_elliptic(state.grid, p.D_Psi, Psi_star, reaction, psi, opt);
  report.clamped = kin.clamp_count() - clamps_before;
  return report;
}

std::vector<double> fd_oracle(std::size_t n_intervals, double R, double D,
                              double dirichlet,
                              const std::function<double(double y, double r)>& f,
                              const FdOracleOptions& opt) {
  if (!(R > 0)) throw ConfigError("fd_oracle: R must be positive");
  const std::size_t N = n_intervals;
  const double h = R / double(N);
  std::vector<double> y(N + 1, dirichlet);
  std::vector<double> F(N + 1), lower(N + 1), diag(N + 1), upper(N + 1);

  auto dfdy = [&](double yv, double r) {
    double e = 1e-6 * std::max(1.0, std::abs(yv));
    return (f(yv + e, r) - f(yv - e, r)) / (2.0 * e);
  };

  auto residual = [&](const std::vector<double>& yy, std::vector<double>& out) {
    out[0] = -6.0 * D * (yy[1] - yy[0]) / (h * h) - f(yy[0], 0.0);
    for (std::size_t i = 1; i < N; ++i) {
      double r = double(i) * h;
      double a = (r + 0.5 * h) * (r + 0.5 * h);
      double b = (r - 0.5 * h) * (r - 0.5 * h);
      out[i] = -D * (a * (yy[i + 1] - yy[i]) - b * (yy[i] - yy[i - 1])) / (r * r * h * h) -
               f(yy[i], r);
    }
    out[N] = yy[N] - dirichlet;
  };

  const double scale = std::max(1.0, std::abs(dirichlet));
  auto max_abs = [](const std::vector<double>& v) {
    double m = 0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
  };

  residual(y, F);
  double Fnorm = max_abs(F);
  bool converged = false;
  for (int it = 0; it < opt.max_iter && !converged; ++it) {
    diag[0] = 6.0 * D / (h * h) - dfdy(y[0], 0.0);
    upper[0] = -6.0 * D / (h * h);
    for (std::size_t i = 1; i < N; ++i) {
      double r = double(i) * h;
      double a = (r + 0.5 * h) * (r + 0.5 * h);
      double b = (r - 0.5 * h) * (r - 0.5 * h);
      lower[i] = -D * b / (r * r * h * h);
      diag[i] = D * (a + b) / (r * r * h * h) - dfdy(y[i], r);
      upper[i] = -D * a / (r * r * h * h);
    }
    lower[N] = 0.0;
    diag[N] = 1.0;

    // Thomas solve of J delta = -F.
    std::vector<double> cp(N + 1), dp(N + 1);
    cp[0] = upper[0] / diag[0];
    dp[0] = -F[0] / diag[0];
    for (std::size_t i = 1; i <= N; ++i) {
      double denom = diag[i] - lower[i] * cp[i - 1];
      cp[i] = (i < N) ? upper[i] / denom : 0.0;
      dp[i] = (-F[i] - lower[i] * dp[i - 1]) / denom;
    }
    std::vector<double> delta(N + 1);
    delta[N] = dp[N];
    for (std::size_t i = N; i-- > 0;) delta[i] = dp[i] - cp[i] * delta[i + 1];

    // Damped update: halve the step while the residual grows.
    double step = 1.0;
    std::vector<double> trial(N + 1), Ftrial(N + 1);
    for (int back = 0; back < 30; ++back) {
      for (std::size_t i = 0; i <= N; ++i) trial[i] = y[i] + step * delta[i];
      residual(trial, Ftrial);
      if (max_abs(Ftrial) <= Fnorm || step < 1e-6) break;
      step *= 0.5;
    }
    y = trial;
    F = Ftrial;
    Fnorm = max_abs(F);
    if (step * max_abs(delta) <= opt.tol * scale) converged = true;
  }
  if (!converged)
    throw NonConvergenceError("fd_oracle Newton iteration did not converge (residual " +
                              std::to_string(Fnorm) + ")");
  return y;
}

}  // namespace granule
