#include "granule/picard.hpp"

#include "granule/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace granule {

namespace {

double cube(double v) { return v * v * v; }

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RateTables {
  std::vector<double> G;     // N*N
  std::vector<double> F;     // N*N*n
  std::vector<double> rS;    // N*N*m
  std::vector<double> rPsi;  // N*N*n
};

RateTables evaluate_rates(const FieldBundle& in, const ModelParameters& p,
                          const KineticsModel& kin) {
  const std::size_t N = in.N, n = p.n, m = p.m;
  RateTables t;
  t.G.assign(N * N, 0.0);
  t.F.assign(N * N * n, 0.0);
  t.rS.assign(N * N * m, 0.0);
  t.rPsi.assign(N * N * n, 0.0);
  std::vector<double> rm(n), rp(n);
  for (std::size_t l = 0; l < N; ++l) {
    for (std::size_t k = 0; k <= l; ++k) {
      const std::size_t idx = in.at(k, l);
      std::span<const double> x{in.x.data() + idx * n, n};
      std::span<const double> s{in.s.data() + idx * m, m};
      std::span<const double> psi{in.psi.data() + idx * n, n};
      kin.growth_rates(x, s, rm);
      kin.invasion_rates(psi, s, rp);
      t.G[idx] = growth_sum(rm, rp);
      transport_rhs(x, rm, rp, t.G[idx], p, {t.F.data() + idx * n, n});
      kin.substrate_rates(x, s, {t.rS.data() + idx * m, m});
      kin.planktonic_rates(psi, s, {t.rPsi.data() + idx * n, n});
    }
  }
  return t;
}

}  // namespace

HBox default_hbox(const ModelParameters& p, const BulkEnvironment& bulk, double T1) {
  HBox box;
  box.h_x.resize(p.n);
  for (std::size_t i = 0; i < p.n; ++i) box.h_x[i] = 0.5 * p.rho[i];
  box.h_s.resize(p.m);
  for (std::size_t j = 0; j < p.m; ++j)
    box.h_s[j] = 0.5 * std::max(bulk.S_star[j].max_over(0, T1), 1e-12);
  box.h_psi.resize(p.n);
  for (std::size_t i = 0; i < p.n; ++i)
    box.h_psi[i] = 0.5 * std::max(bulk.Psi_star[i].max_over(0, T1), 1e-12);
  // Sigma(T1) by fine trapezoid, sigma_a max over samples.
  const int ns = 512;
  double Sigma = 0.0, sa_prev = sigma_a(bulk.Psi_at(0.0), p), sa_max = sa_prev;
  for (int i = 1; i <= ns; ++i) {
    double t = T1 * double(i) / ns;
    double sa = sigma_a(bulk.Psi_at(t), p);
    Sigma += 0.5 * (sa_prev + sa) * (T1 / ns);
    sa_max = std::max(sa_max, sa);
    sa_prev = sa;
  }
  box.h_c1 = 0.5 * std::max(Sigma, 1e-12);
  box.h_c2 = 0.5 * std::max(sa_max, 1e-12);
  box.c_floor = 0.05 * (Sigma + box.h_c1);
  return box;
}

FieldBundle initial_bundle(std::size_t grid_points, double T, const ModelParameters& p,
                           const BulkEnvironment& bulk) {
  if (grid_points < 3) throw ConfigError("picard grid needs at least 3 points");
  if (!(T > 0)) throw ConfigError("picard horizon must be positive");
  FieldBundle b;
  b.N = grid_points;
  b.T = T;
  b.n = p.n;
  b.m = p.m;
  const std::size_t N = b.N;
  b.c.assign(N * N, 0.0);
  b.q.assign(N * N, 0.0);
  b.x.assign(N * N * p.n, 0.0);
  b.s.assign(N * N * p.m, 0.0);
  b.psi.assign(N * N * p.n, 0.0);

  std::vector<double> Sigma(N, 0.0), sa(N);
  for (std::size_t k = 0; k < N; ++k) sa[k] = sigma_a(bulk.Psi_at(b.grid_time(k)), p);
  const double dt = T / double(N - 1);
  for (std::size_t k = 1; k < N; ++k) Sigma[k] = Sigma[k - 1] + 0.5 * (sa[k - 1] + sa[k]) * dt;

  for (std::size_t l = 0; l < N; ++l) {
    auto S_t = bulk.S_at(b.grid_time(l));
    auto Psi_t = bulk.Psi_at(b.grid_time(l));
    for (std::size_t k = 0; k <= l; ++k) {
      const std::size_t idx = b.at(k, l);
      b.c[idx] = Sigma[k];
      b.q[idx] = sa[k];
      auto X0 = boundary_fractions(bulk.Psi_at(b.grid_time(k)), p);
      for (std::size_t i = 0; i < p.n; ++i) b.x[idx * p.n + i] = X0[i];
      for (std::size_t j = 0; j < p.m; ++j) b.s[idx * p.m + j] = S_t[j];
      for (std::size_t i = 0; i < p.n; ++i) b.psi[idx * p.n + i] = Psi_t[i];
    }
  }
  return b;
}

FieldBundle apply_operator_A(const FieldBundle& in, const ModelParameters& p,
                             const KineticsModel& kin, const BulkEnvironment& bulk,
                             Regime regime, const HBox* check) {
  const std::size_t N = in.N, n = p.n, m = p.m;
  const double dt = in.T / double(N - 1);
  FieldBundle out = in;

  RateTables rates = evaluate_rates(in, p, kin);

  // Diagonal data: R(theta) = c(theta, theta), net attachment flux.
  std::vector<double> R(N), sa(N), snet(N);
  for (std::size_t l = 0; l < N; ++l) {
    R[l] = in.c[in.at(l, l)];
    sa[l] = sigma_a(bulk.Psi_at(in.grid_time(l)), p);
    snet[l] = sa[l] - (regime == Regime::General ? sigma_d(R[l], p) : 0.0);
  }

  // Inner integrals I(k,l) = int_0^{t0_k} c^2 G c_tau dtau at time level l,
  // as trapezoid in c^3/3.
  std::vector<double> I(N * N, 0.0);
  for (std::size_t l = 0; l < N; ++l)
    for (std::size_t k = 1; k <= l; ++k) {
      const std::size_t a = in.at(k - 1, l), b = in.at(k, l);
      I[in.at(k, l)] = I[a] + 0.5 * (rates.G[a] + rates.G[b]) *
                                  (cube(in.c[b]) - cube(in.c[a])) / 3.0;
    }

  // Characteristics in cubic form:
  //   c^3(t0,t) = 3 int_0^{t0} R^2 snet dth + 3 int_0^{t0} I(th,th) dth
  //             + 3 int_{t0}^{t} I(t0,th) dth.
  // The diagonal (the radius) is advanced in R itself, dR/dt = u(R) + snet
  // with u = I(th,th)/R^2, which is Lipschitz at R = 0 (u -> G R/3).
  // Accumulating R^3 directly hits the non-Lipschitz y^{2/3} start and the
  // degenerate first cell gets amplified into a first-order global error.
  std::vector<double> diag_part(N, 0.0);  // R_new^3 on the diagonal
  const double R_scale = std::max(R[N - 1], 1e-300);
  {
    double Rn = 0.0, f_prev = snet[0];
    for (std::size_t k = 1; k < N; ++k) {
      const std::size_t dk = in.at(k, k);
      double u_k = R[k] <= kCenterEps * R_scale ? rates.G[dk] * R[k] / 3.0
                                                : I[dk] / (R[k] * R[k]);
      double f_k = u_k + snet[k];
      Rn += 0.5 * (f_prev + f_k) * dt;
      diag_part[k] = cube(std::max(Rn, 0.0));
      f_prev = f_k;
    }
  }
  for (std::size_t k = 0; k < N; ++k) {
    double tail = 0.0;
    out.c[in.at(k, k)] = std::cbrt(std::max(0.0, diag_part[k]));
    for (std::size_t l = k + 1; l < N; ++l) {
      tail += 3.0 * 0.5 * (I[in.at(k, l - 1)] + I[in.at(k, l)]) * dt;
      out.c[in.at(k, l)] = std::cbrt(std::max(0.0, diag_part[k] + tail));
    }
  }

  // dc/dt0 from the cubic relation c^2 q(t0,t) = R^2 snet(t0)
  //   + int_{t0}^{t} c^2 G q dth, with the direct center limit where c ~ 0.
  const double c_scale = std::max(in.c[in.at(N - 1, N - 1)], 1e-300);
  for (std::size_t k = 0; k < N; ++k) {
    double acc = 0.0;     // cubic integral
    double acc_dir = 0.0; // center-limit integral of (G/3) q
    out.q[in.at(k, k)] = snet[k];
    for (std::size_t l = k + 1; l < N; ++l) {
      const std::size_t a = in.at(k, l - 1), b = in.at(k, l);
      acc += 0.5 * (in.c[a] * in.c[a] * rates.G[a] * in.q[a] +
                    in.c[b] * in.c[b] * rates.G[b] * in.q[b]) * dt;
      acc_dir += 0.5 * (rates.G[a] * in.q[a] / 3.0 + rates.G[b] * in.q[b] / 3.0) * dt;
      const double c_here = in.c[b];
      if (c_here <= kCenterEps * c_scale)
        out.q[b] = snet[k] + acc_dir;
      else
        out.q[b] = (R[k] * R[k] * snet[k] + acc) / (c_here * c_here);
    }
  }

  // Sessile values along each characteristic row.
  for (std::size_t k = 0; k < N; ++k) {
    auto X0 = boundary_fractions(bulk.Psi_at(in.grid_time(k)), p);
    for (std::size_t i = 0; i < n; ++i) out.x[in.at(k, k) * n + i] = X0[i];
    std::vector<double> acc(n, 0.0);
    for (std::size_t l = k + 1; l < N; ++l) {
      const std::size_t a = in.at(k, l - 1), b = in.at(k, l);
      for (std::size_t i = 0; i < n; ++i) {
        acc[i] += 0.5 * (rates.F[a * n + i] + rates.F[b * n + i]) * dt;
        out.x[b * n + i] = X0[i] + acc[i];
      }
    }
  }

  // Substrates and planktonic species, column by column (fixed t).
  std::vector<double> inner(N), g(N);
  for (std::size_t l = 0; l < N; ++l) {
    auto S_t = bulk.S_at(in.grid_time(l));
    auto Psi_t = bulk.Psi_at(in.grid_time(l));
    auto solve_column = [&](std::span<const double> rate_tab, std::size_t nf,
                            std::size_t f, double D, double dirichlet,
                            std::vector<double>& target) {
      inner[0] = 0.0;
      for (std::size_t k = 1; k <= l; ++k) {
        const std::size_t a = in.at(k - 1, l), b = in.at(k, l);
        inner[k] = inner[k - 1] + 0.5 * (rate_tab[a * nf + f] + rate_tab[b * nf + f]) *
                                      (cube(in.c[b]) - cube(in.c[a])) / 3.0;
      }
      for (std::size_t k = 0; k <= l; ++k) {
        const std::size_t b = in.at(k, l);
        if (in.c[b] <= kCenterEps * c_scale)
          g[k] = in.q[b] * rate_tab[b * nf + f] * in.c[b] / 3.0;
        else
          g[k] = in.q[b] * inner[k] / (in.c[b] * in.c[b]);
      }
      double acc2 = 0.0;
      target[in.at(l, l) * nf + f] = dirichlet;
      for (std::size_t k = l; k-- > 0;) {
        acc2 += 0.5 * (g[k] + g[k + 1]) * dt;
        target[in.at(k, l) * nf + f] = dirichlet + acc2 / D;
      }
    };
    for (std::size_t j = 0; j < m; ++j)
      solve_column(rates.rS, m, j, p.D_S[j], S_t[j], out.s);
    for (std::size_t i = 0; i < n; ++i)
      solve_column(rates.rPsi, n, i, p.D_Psi[i], Psi_t[i], out.psi);
  }

  if (check) {
    // Reference functions for the h-box: Sigma and sigma_a.
    std::vector<double> Sigma(N, 0.0);
    for (std::size_t k = 1; k < N; ++k)
      Sigma[k] = Sigma[k - 1] + 0.5 * (sa[k - 1] + sa[k]) * dt;
    for (std::size_t l = 0; l < N; ++l) {
      auto S_t = bulk.S_at(in.grid_time(l));
      auto Psi_t = bulk.Psi_at(in.grid_time(l));
      for (std::size_t k = 0; k <= l; ++k) {
        const std::size_t idx = in.at(k, l);
        auto X0 = boundary_fractions(bulk.Psi_at(in.grid_time(k)), p);
        auto fail = [&](const std::string& what) {
          throw StateError("operator output escaped the h-box (" + what +
                           ") at t0 index " + std::to_string(k) + ", t index " +
                           std::to_string(l) + "; horizon too large, reduce T");
        };
        for (std::size_t i = 0; i < n; ++i)
          if (std::abs(out.x[idx * n + i] - X0[i]) > check->h_x[i]) fail("x");
        for (std::size_t j = 0; j < m; ++j)
          if (std::abs(out.s[idx * m + j] - S_t[j]) > check->h_s[j]) fail("s");
        for (std::size_t i = 0; i < n; ++i)
          if (std::abs(out.psi[idx * n + i] - Psi_t[i]) > check->h_psi[i]) fail("psi");
        if (std::abs(out.c[idx] - Sigma[k]) > check->h_c1) fail("c");
        if (std::abs(out.q[idx] - sa[k]) > check->h_c2) fail("c_t0");
      }
    }
  }
  return out;
}

double bundle_distance(const FieldBundle& a, const FieldBundle& b) {
  const std::size_t N = a.N, n = a.n, m = a.m;
  std::vector<double> dx(n, 0.0), ds(m, 0.0), dpsi(n, 0.0);
  double dc = 0.0, dq = 0.0;
  for (std::size_t l = 0; l < N; ++l)
    for (std::size_t k = 0; k <= l; ++k) {
      const std::size_t idx = a.at(k, l);
      dc = std::max(dc, std::abs(a.c[idx] - b.c[idx]));
      dq = std::max(dq, std::abs(a.q[idx] - b.q[idx]));
      for (std::size_t i = 0; i < n; ++i)
        dx[i] = std::max(dx[i], std::abs(a.x[idx * n + i] - b.x[idx * n + i]));
      for (std::size_t j = 0; j < m; ++j)
        ds[j] = std::max(ds[j], std::abs(a.s[idx * m + j] - b.s[idx * m + j]));
      for (std::size_t i = 0; i < n; ++i)
        dpsi[i] = std::max(dpsi[i], std::abs(a.psi[idx * n + i] - b.psi[idx * n + i]));
    }
  return std::accumulate(dx.begin(), dx.end(), 0.0) +
         std::accumulate(ds.begin(), ds.end(), 0.0) +
         std::accumulate(dpsi.begin(), dpsi.end(), 0.0) + dc + dq;
}

FieldBundle picard_solve(FieldBundle init, const ModelParameters& p,
                         const KineticsModel& kin, const BulkEnvironment& bulk,
                         const PicardOptions& opt, PicardHistory& history) {
  history = PicardHistory{};
  FieldBundle current = std::move(init);
  for (int it = 1; it <= opt.max_iter; ++it) {
    FieldBundle next = apply_operator_A(current, p, kin, bulk, opt.regime,
                                        opt.check_hbox ? &opt.hbox : nullptr);
    double err = bundle_distance(next, current);
    history.errors.push_back(err);
    history.iterations = it;
    current = std::move(next);
    if (err <= opt.tol) {
      history.converged = true;
      return current;
    }
  }
  throw NonConvergenceError("picard iteration did not converge in " +
                                std::to_string(opt.max_iter) + " iterations",
                            history.errors);
}

namespace {

// Latin-hypercube points in [0,1]^d: per dimension a shuffled stratification.
std::vector<double> latin_hypercube(std::size_t ns, std::size_t d, std::mt19937& rng) {
  std::vector<double> pts(ns * d);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::size_t> perm(ns);
  for (std::size_t dim = 0; dim < d; ++dim) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < ns; ++i)
      pts[i * d + dim] = (double(perm[i]) + unif(rng)) / double(ns);
  }
  return pts;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  double map(double u) const { return lo + u * (hi - lo); }
};

}  // namespace

ContractionReport estimate_contraction(const ModelParameters& p, const KineticsModel& kin,
                                       const BulkEnvironment& bulk, const HBox& box,
                                       double T1, const ContractionOptions& opt) {
  const std::size_t n = p.n, m = p.m;
  ContractionReport rep;
  rep.hbox = box;
  rep.T1 = T1;
  rep.samples = opt.samples;
  rep.lambda_x.assign(n, 0.0);
  rep.lambda_s.assign(m, 0.0);
  rep.lambda_psi.assign(n, 0.0);
  rep.M_x.assign(n, 0.0);
  rep.M_s.assign(m, 0.0);
  rep.M_psi.assign(n, 0.0);

  // Reference ranges over [0, T1].
  const int nt = 256;
  std::vector<double> X0_lo(n, kInf), X0_hi(n, -kInf);
  std::vector<double> S_lo(m, kInf), S_hi(m, -kInf);
  std::vector<double> P_lo(n, kInf), P_hi(n, -kInf);
  double sa_lo = kInf, sa_hi = -kInf, Sigma = 0.0, sa_prev = 0.0;
  for (int it = 0; it <= nt; ++it) {
    double t = T1 * double(it) / nt;
    auto Psi_t = bulk.Psi_at(t);
    auto S_t = bulk.S_at(t);
    double sa = sigma_a(Psi_t, p);
    if (it > 0) Sigma += 0.5 * (sa_prev + sa) * (T1 / nt);
    sa_prev = sa;
    sa_lo = std::min(sa_lo, sa);
    sa_hi = std::max(sa_hi, sa);
    double flux = 0.0;
    for (std::size_t i = 0; i < n; ++i) flux += p.v_a[i] * Psi_t[i];
    if (flux > 0.0) {
      auto X0 = boundary_fractions(Psi_t, p);
      for (std::size_t i = 0; i < n; ++i) {
        X0_lo[i] = std::min(X0_lo[i], X0[i]);
        X0_hi[i] = std::max(X0_hi[i], X0[i]);
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      S_lo[j] = std::min(S_lo[j], S_t[j]);
      S_hi[j] = std::max(S_hi[j], S_t[j]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      P_lo[i] = std::min(P_lo[i], Psi_t[i]);
      P_hi[i] = std::max(P_hi[i], Psi_t[i]);
    }
  }
  if (!(sa_hi > 0))
    throw ConfigError("contraction estimate: attachment flux is identically zero");

  const AdmissibleBox& ab = kin.box();
  std::vector<Range> xr(n), sr(m), pr(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lo = std::isfinite(X0_lo[i]) ? X0_lo[i] : 0.0;
    double hi = std::isfinite(X0_hi[i]) ? X0_hi[i] : p.rho[i];
    xr[i] = {std::max(0.0, lo - box.h_x[i]), std::min(ab.x_max, hi + box.h_x[i])};
  }
  for (std::size_t j = 0; j < m; ++j)
    sr[j] = {std::max(0.0, S_lo[j] - box.h_s[j]), std::min(ab.s_max, S_hi[j] + box.h_s[j])};
  for (std::size_t i = 0; i < n; ++i)
    pr[i] = {std::max(0.0, P_lo[i] - box.h_psi[i]),
             std::min(ab.psi_max, P_hi[i] + box.h_psi[i])};
  double c_floor = box.c_floor > 0 ? box.c_floor : 0.05 * (Sigma + box.h_c1);
  Range cr{c_floor, std::max(c_floor * (1 + 1e-12), Sigma + box.h_c1)};
  Range qr{std::max(0.0, sa_lo - box.h_c2), sa_hi + box.h_c2};

  // One sampled argument tuple: x, s, psi, two c values (ordered), two q values.
  const std::size_t d = n + m + n + 2 + 2;
  std::mt19937 rng(opt.seed);
  auto ptsA = latin_hypercube(opt.samples, d, rng);
  auto ptsB = latin_hypercube(opt.samples, d, rng);

  struct Args {
    std::vector<double> x, s, psi;
    double c_big, c_small, q1, q2;
  };
  auto decode = [&](const double* u) {
    Args a;
    a.x.resize(n);
    a.s.resize(m);
    a.psi.resize(n);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) a.x[i] = xr[i].map(u[idx++]);
    for (std::size_t j = 0; j < m; ++j) a.s[j] = sr[j].map(u[idx++]);
    for (std::size_t i = 0; i < n; ++i) a.psi[i] = pr[i].map(u[idx++]);
    double ca = cr.map(u[idx++]), cb = cr.map(u[idx++]);
    a.c_big = std::max(ca, cb);   // the 1/c^2 argument (c at the later birth time)
    a.c_small = std::min(ca, cb);
    a.q1 = qr.map(u[idx++]);
    a.q2 = qr.map(u[idx++]);
    return a;
  };

  struct KernelVals {
    std::vector<double> F;     // n
    std::vector<double> Fs;    // m
    std::vector<double> Fpsi;  // n
    double Fc12, Fc3, G;
  };
  std::vector<double> rm(n), rp(n), rs(m), rpsi(n);
  auto eval = [&](const Args& a) {
    KernelVals v;
    v.F.resize(n);
    v.Fs.resize(m);
    v.Fpsi.resize(n);
    kin.growth_rates(a.x, a.s, rm);
    kin.invasion_rates(a.psi, a.s, rp);
    v.G = growth_sum(rm, rp);
    transport_rhs(a.x, rm, rp, v.G, p, v.F);
    kin.substrate_rates(a.x, a.s, rs);
    kin.planktonic_rates(a.psi, a.s, rpsi);
    const double geom = (a.c_small * a.c_small) / (a.c_big * a.c_big);
    for (std::size_t j = 0; j < m; ++j)
      v.Fs[j] = geom * rs[j] * a.q1 * a.q2 / p.D_S[j];
    for (std::size_t i = 0; i < n; ++i)
      v.Fpsi[i] = geom * rpsi[i] * a.q1 * a.q2 / p.D_Psi[i];
    v.Fc12 = geom * v.G * a.q2;
    v.Fc3 = v.G * a.q2;
    return v;
  };

  double M_c1 = 0.0, M_c2 = 0.0;
  double lam_c12 = 0.0, lam_c3 = 0.0;
  for (std::size_t sidx = 0; sidx < opt.samples; ++sidx) {
    Args a = decode(&ptsA[sidx * d]);
    Args b = decode(&ptsB[sidx * d]);
    KernelVals va = eval(a), vb = eval(b);

    for (std::size_t i = 0; i < n; ++i) {
      rep.M_x[i] = std::max({rep.M_x[i], std::abs(va.F[i]), std::abs(vb.F[i])});
      rep.M_psi[i] = std::max({rep.M_psi[i], std::abs(va.Fpsi[i]), std::abs(vb.Fpsi[i])});
    }
    for (std::size_t j = 0; j < m; ++j)
      rep.M_s[j] = std::max({rep.M_s[j], std::abs(va.Fs[j]), std::abs(vb.Fs[j])});
    M_c1 = std::max({M_c1, std::abs(va.Fc12), std::abs(vb.Fc12)});
    M_c2 = std::max({M_c2, std::abs(va.Fc3), std::abs(vb.Fc3)});

    double dxs = 0.0, dss = 0.0, dps = 0.0;
    for (std::size_t i = 0; i < n; ++i) dxs += std::abs(a.x[i] - b.x[i]);
    for (std::size_t j = 0; j < m; ++j) dss += std::abs(a.s[j] - b.s[j]);
    for (std::size_t i = 0; i < n; ++i) dps += std::abs(a.psi[i] - b.psi[i]);
    double dc = std::max(std::abs(a.c_big - b.c_big), std::abs(a.c_small - b.c_small));
    double dq = std::max(std::abs(a.q1 - b.q1), std::abs(a.q2 - b.q2));
    const double eps = 1e-14;

    double den_F = dxs + dss + dps + eps;
    for (std::size_t i = 0; i < n; ++i)
      rep.lambda_x[i] = std::max(rep.lambda_x[i], std::abs(va.F[i] - vb.F[i]) / den_F);
    double den_s = dxs + dss + dc + dq + eps;
    for (std::size_t j = 0; j < m; ++j)
      rep.lambda_s[j] = std::max(rep.lambda_s[j], std::abs(va.Fs[j] - vb.Fs[j]) / den_s);
    double den_psi = dps + dss + dc + dq + eps;
    for (std::size_t i = 0; i < n; ++i)
      rep.lambda_psi[i] =
          std::max(rep.lambda_psi[i], std::abs(va.Fpsi[i] - vb.Fpsi[i]) / den_psi);
    double den_c = dxs + dss + dps + dc + dq + eps;
    lam_c12 = std::max(lam_c12, std::abs(va.Fc12 - vb.Fc12) / den_c);
    double den_c3 = dxs + dss + dps + dq + eps;
    lam_c3 = std::max(lam_c3, std::abs(va.Fc3 - vb.Fc3) / den_c3);
  }
  rep.lambda_c1 = rep.lambda_c2 = lam_c12;
  rep.lambda_c3 = lam_c3;
  rep.M_c1 = M_c1;
  rep.M_c2 = M_c2;

  rep.a = std::accumulate(rep.lambda_s.begin(), rep.lambda_s.end(), 0.0) +
          std::accumulate(rep.lambda_psi.begin(), rep.lambda_psi.end(), 0.0) +
          rep.lambda_c1 + rep.lambda_c2;
  rep.b = std::accumulate(rep.lambda_x.begin(), rep.lambda_x.end(), 0.0) + rep.lambda_c3;

  auto safe_div = [](double num, double den) { return den > 0 ? num / den : kInf; };
  double T = T1;
  for (std::size_t i = 0; i < n; ++i) T = std::min(T, safe_div(box.h_x[i], rep.M_x[i]));
  for (std::size_t j = 0; j < m; ++j)
    T = std::min(T, std::sqrt(safe_div(box.h_s[j], rep.M_s[j])));
  for (std::size_t i = 0; i < n; ++i)
    T = std::min(T, std::sqrt(safe_div(box.h_psi[i], rep.M_psi[i])));
  T = std::min(T, std::sqrt(safe_div(box.h_c1, 2.0 * rep.M_c1)));
  T = std::min(T, safe_div(box.h_c2, rep.M_c2));

  double T_root = kInf;
  if (rep.a > 0)
    T_root = (-rep.b + std::sqrt(rep.b * rep.b + 4.0 * rep.a)) / (2.0 * rep.a);
  else if (rep.b > 0)
    T_root = 1.0 / rep.b;
  rep.T_guaranteed = std::min(T, T_root * (1.0 - 1e-9));
  rep.Lambda = rep.lambda_at(rep.T_guaranteed);
  rep.certified = rep.T_guaranteed > 0 && rep.Lambda < 1.0;
  return rep;
}

}  // namespace granule
