#include "granule/validate.hpp"

#include <cmath>
#include <sstream>

namespace granule {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Single-species configuration with near-saturated Monod kinetics, so the
// specific growth rate is mu to within the half-saturation residue.
SimulationConfig single_species(double mu, double v_a, double dt, double T) {
  SimulationConfig cfg;
  cfg.model.n = 1;
  cfg.model.m = 1;
  cfg.model.rho = {1.0};
  cfg.model.D_S = {1.0};
  cfg.model.D_Psi = {1.0};
  cfg.model.v_a = {v_a};
  cfg.model.delta = 0.0;
  cfg.bulk.S_star = {TimeSeries(1.0)};
  cfg.bulk.Psi_star = {TimeSeries(1.0)};
  cfg.kinetics.mu_max = {mu};
  cfg.kinetics.K = {1e-9};
  cfg.kinetics.k_col = {0.0};
  cfg.kinetics.growth_substrate = {0};
  cfg.kinetics.yield = {0.0};
  cfg.kinetics.rho = cfg.model.rho;
  cfg.numerics.dt = dt;
  cfg.numerics.t_end = T;
  return cfg;
}

ValidationResult check(const std::string& name, bool ok, const std::string& detail) {
  return {name, ok, detail};
}

void analytic_suite(std::vector<ValidationResult>& out) {
  {
    // Zero growth: dR/dt = sigma_a, so R(t) = sigma_a t exactly.
    SimulationConfig cfg = single_species(0.0, 0.1, 1e-2, 1.0);
    auto kin = cfg.make_kinetics();
    RunResult r = run_marching(cfg, kin);
    double err = std::abs(r.series.back().R - 0.1);
    out.push_back(check("analytic/linear-radius", err <= 1e-10,
                        "|R(1) - 0.1| = " + fmt(err)));
  }
  {
    // Constant growth rate mu: R(t) = (3 sigma_a / mu)(e^{mu t/3} - 1).
    SimulationConfig cfg = single_species(3.0, 0.1, 1e-3, 1.0);
    auto kin = cfg.make_kinetics();
    RunResult r = run_marching(cfg, kin);
    double exact = 0.1 * (std::exp(1.0) - 1.0);
    double err = std::abs(r.series.back().R - exact) / exact;
    out.push_back(check("analytic/exponential-radius", err <= 5e-3,
                        "relative error " + fmt(err)));
  }
  {
    // Constant consumption k: s(r) = S* - k (R^2 - r^2) / (6 D).
    const double S_star = 10.0, k_rate = 0.6, R = 1.0, D = 1.0;
    const std::size_t K = 101;
    CharacteristicGrid grid;
    grid.t0.resize(K);
    grid.c.resize(K);
    grid.q.assign(K, 1.0);
    for (std::size_t i = 0; i < K; ++i) {
      grid.t0[i] = double(i) / double(K - 1);
      grid.c[i] = R * double(i) / double(K - 1);
    }
    std::vector<double> field;
    double Dv = D, dir = S_star;
    solve_elliptic(
        grid, {&Dv, 1}, {&dir, 1},
        [&](std::size_t, std::span<const double>, std::span<double> r) { r[0] = -k_rate; },
        field, EllipticOptions{});
    double max_err = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      double exact = S_star - k_rate * (R * R - grid.c[i] * grid.c[i]) / (6.0 * D);
      max_err = std::max(max_err, std::abs(field[i] - exact));
    }
    out.push_back(check("analytic/substrate-profile", max_err <= 1e-6,
                        "max abs error " + fmt(max_err) + ", center " + fmt(field[0])));
  }
}

void oracle_suite(std::vector<ValidationResult>& out) {
  // Monod consumption against the independent finite-difference solver,
  // frozen sessile field, matching uniform meshes.
  const double R = 1.0, D = 0.8, S_star = 2.0;
  SimulationConfig cfg = single_species(1.5, 0.1, 1e-3, 1.0);
  cfg.kinetics.K = {0.3};
  cfg.kinetics.yield = {0.7};
  cfg.model.D_S = {D};
  auto kin = cfg.make_kinetics();

  const std::size_t K = 201;
  GranuleState st;
  st.R = R;
  st.grid.t0.resize(K);
  st.grid.c.resize(K);
  st.grid.q.assign(K, 1.0);
  st.x.assign(K, 0.8);
  st.psi.assign(K, 0.0);
  for (std::size_t i = 0; i < K; ++i) {
    st.grid.t0[i] = double(i) / double(K - 1);
    st.grid.c[i] = R * double(i) / double(K - 1);
  }
  std::vector<double> field;
  double S_dir = S_star;
  solve_substrates(st, cfg.model, kin, {&S_dir, 1}, field, EllipticOptions{});

  std::vector<double> x_frozen{0.8}, s_one(1), r_one(1);
  auto fd = fd_oracle(K - 1, R, D, S_star, [&](double y, double) {
    s_one[0] = y;
    kin.substrate_rates(x_frozen, s_one, r_one);
    return r_one[0];
  });
  double max_err = 0.0;
  for (std::size_t i = 0; i < K; ++i)
    max_err = std::max(max_err, std::abs(field[i] - fd[i]) / S_star);
  out.push_back(check("oracle/monod-substrate", max_err <= 1e-4,
                      "max relative gap " + fmt(max_err)));
}

void invariants_suite(std::vector<ValidationResult>& out) {
  SimulationConfig cfg;
  cfg.model.n = 3;
  cfg.model.m = 1;
  cfg.model.rho = {1.0, 2.0, 1.5};
  cfg.model.D_S = {1.0};
  cfg.model.D_Psi = {1.0, 1.0, 1.0};
  cfg.model.v_a = {0.05, 0.03, 0.02};
  cfg.bulk.S_star = {TimeSeries(2.0)};
  cfg.bulk.Psi_star = {TimeSeries(1.0), TimeSeries(0.5), TimeSeries(0.8)};
  cfg.kinetics.mu_max = {1.0, 2.0, 0.5};
  cfg.kinetics.K = {0.5, 0.3, 0.8};
  cfg.kinetics.k_col = {0.1, 0.05, 0.2};
  cfg.kinetics.growth_substrate = {0, 0, 0};
  cfg.kinetics.yield = {0.4, 0.6, 0.2};
  cfg.kinetics.rho = cfg.model.rho;
  cfg.numerics.dt = 5e-3;
  cfg.numerics.t_end = 0.25;
  auto kin = cfg.make_kinetics();
  RunResult r = run_marching(cfg, kin);
  const GranuleState& st = r.final_state;

  double worst = 0.0;
  for (std::size_t k = 0; k < st.grid.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < cfg.model.n; ++i)
      sum += st.x[k * cfg.model.n + i] / cfg.model.rho[i];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  out.push_back(check("invariants/volume-fraction-simplex", worst <= 1e-6,
                      "max |sum f - 1| = " + fmt(worst)));

  bool monotone = true;
  std::string why = "grid strictly increasing, dc/dt0 positive";
  try {
    st.grid.check_monotone();
  } catch (const StateError& e) {
    monotone = false;
    why = e.what();
  }
  out.push_back(check("invariants/grid-monotone", monotone, why));

  auto G = growth_profile(st, cfg.model, kin);
  auto u = velocity_profile(st.grid, G);
  double ratio_err =
      std::abs(u[1] / st.grid.c[1] - G[0] / 3.0) / std::max(std::abs(G[0] / 3.0), 1e-30);
  bool center_ok = u[0] == 0.0 && ratio_err <= 1e-3;
  out.push_back(check("invariants/center-velocity", center_ok,
                      "u(0) = " + fmt(u[0]) + ", |u/c - G/3| rel = " + fmt(ratio_err)));
}

}  // namespace

std::vector<ValidationResult> run_validation(const std::string& suite) {
  std::vector<ValidationResult> out;
  bool all = suite == "all";
  if (all || suite == "analytic") analytic_suite(out);
  if (all || suite == "oracle") oracle_suite(out);
  if (all || suite == "invariants") invariants_suite(out);
  if (out.empty())
    throw ConfigError("unknown validation suite: " + suite +
                      " (expected analytic, oracle, invariants, or all)");
  return out;
}

}  // namespace granule
