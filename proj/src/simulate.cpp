#include "granule/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace granule {

namespace {

double cube(double v) { return v * v * v; }

double net_growth_flux(const RegimeStatus& rs, Regime regime) {
  return regime == Regime::General ? rs.net_flux : rs.sigma_a;
}

}  // namespace

const char* classification_name(BoundaryClassification c) {
  return c == BoundaryClassification::SpaceLike ? "space_like" : "time_like";
}

double boundary_velocity(const CharacteristicGrid& grid, std::span<const double> G,
                         double r_eval) {
  if (!(r_eval > 0)) return 0.0;
  double P = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    P += 0.5 * (G[k - 1] + G[k]) * (cube(grid.c[k]) - cube(grid.c[k - 1])) / 3.0;
  const double c_last = grid.size() ? grid.c.back() : 0.0;
  P += G.empty() ? 0.0 : G.back() * (cube(r_eval) - cube(c_last)) / 3.0;
  return P / (r_eval * r_eval);
}

GranuleState initial_state(const SimulationConfig& cfg) {
  GranuleState st;
  st.t = 0.0;
  st.R = 0.0;
  st.grid.t0 = {0.0};
  st.grid.c = {0.0};
  auto Psi0 = cfg.bulk.Psi_at(0.0);
  RegimeStatus rs = classify_regime(Psi0, 0.0, cfg.model);
  st.grid.q = {net_growth_flux(rs, cfg.numerics.regime)};
  st.x = boundary_fractions(Psi0, cfg.model);
  st.s = cfg.bulk.S_at(0.0);
  st.psi = Psi0;
  return st;
}

void march_step(GranuleState& st, const SimulationConfig& cfg, const KineticsModel& kin) {
  const ModelParameters& p = cfg.model;
  const double dt = cfg.numerics.dt;
  const double t = st.t, t2 = st.t + dt;
  const Formulation form = cfg.numerics.formulation;

  RegimeStatus rs1 = classify_regime(cfg.bulk.Psi_at(t), st.R, p);
  if (cfg.numerics.regime == Regime::General && !(rs1.net_flux > 0))
    throw RegimeExitError("attachment regime ended: sigma_a - sigma_d = " +
                              std::to_string(rs1.net_flux) + " at t = " +
                              std::to_string(t),
                          t, st.R);

  auto G1 = growth_profile(st, p, kin);
  auto u1 = velocity_profile(st.grid, G1);
  const double k1 = boundary_velocity(st.grid, G1, st.R) +
                    net_growth_flux(rs1, cfg.numerics.regime);

  // Stage 2 on Euler/Heun-predicted state, with fresh quasi-static solves.
  GranuleState pred = st;
  pred.t = t2;
  pred.grid = grid_predict(st.grid, u1, G1, st.R, dt, form);
  pred.R = st.R + dt * k1;
  const std::size_t K = st.grid.size();
  for (std::size_t k = 0; k < K; ++k) {
    auto Fk = transport_rhs(st.x_at(k, p.n), st.s_at(k, p.m), st.psi_at(k, p.n), p, kin);
    for (std::size_t i = 0; i < p.n; ++i)
      pred.x[k * p.n + i] = st.x[k * p.n + i] + dt * Fk[i];
  }
  auto S2 = cfg.bulk.S_at(t2);
  auto Psi2 = cfg.bulk.Psi_at(t2);
  solve_substrates(pred, p, kin, S2, pred.s, cfg.numerics.elliptic);
  solve_planktonic(pred, p, kin, Psi2, pred.psi, cfg.numerics.elliptic);

  auto G2 = growth_profile(pred, p, kin);
  auto u2 = velocity_profile(pred.grid, G2);
  RegimeStatus rs2 = classify_regime(Psi2, pred.R, p);
  const double k2 = boundary_velocity(pred.grid, G2, pred.R) +
                    net_growth_flux(rs2, cfg.numerics.regime);

  const double R_new = st.R + 0.5 * dt * (k1 + k2);
  CharacteristicGrid moved =
      grid_correct(st.grid, pred.grid, u1, G1, u2, G2, st.R, dt, form);
  std::vector<double> x_new = advance_sessile(st, p, kin, dt, &pred.s, &pred.psi);

  // Birth of one node at the new free boundary.
  RegimeStatus rs_new = classify_regime(Psi2, R_new, p);
  if (cfg.numerics.regime == Regime::General && !(rs_new.net_flux > 0))
    throw RegimeExitError("attachment regime ended: sigma_a - sigma_d = " +
                              std::to_string(rs_new.net_flux) + " at t = " +
                              std::to_string(t2),
                          t2, R_new);
  moved.t0.push_back(t2);
  moved.c.push_back(R_new);
  moved.q.push_back(net_growth_flux(rs_new, cfg.numerics.regime));
  auto X0 = boundary_fractions(Psi2, p);
  x_new.insert(x_new.end(), X0.begin(), X0.end());
  moved.check_monotone();

  st.grid = std::move(moved);
  st.x = std::move(x_new);
  st.t = t2;
  st.R = R_new;
  st.s.insert(st.s.end(), S2.begin(), S2.end());
  st.psi.insert(st.psi.end(), Psi2.begin(), Psi2.end());
  solve_substrates(st, p, kin, S2, st.s, cfg.numerics.elliptic);
  solve_planktonic(st, p, kin, Psi2, st.psi, cfg.numerics.elliptic);
}

namespace {

StepRecord make_record(const GranuleState& st, const SimulationConfig& cfg,
                       const KineticsModel& kin) {
  StepRecord rec;
  rec.t = st.t;
  rec.R = st.R;
  RegimeStatus rs = classify_regime(cfg.bulk.Psi_at(st.t), st.R, cfg.model);
  rec.sigma_a = rs.sigma_a;
  rec.sigma_d = rs.sigma_d;
  rec.classification = rs.classification;
  auto G = growth_profile(st, cfg.model, kin);
  rec.u_boundary = boundary_velocity(st.grid, G, st.R);
  return rec;
}

}  // namespace

RunResult run_marching(const SimulationConfig& cfg, const KineticsModel& kin,
                       const StepObserver& observer) {
  RunResult result;
  result.mode = "marching";
  GranuleState st = initial_state(cfg);
  const long clamps_before = kin.clamp_count();

  const double dt = cfg.numerics.dt;
  const long long n_steps = std::llround(cfg.numerics.t_end / dt);
  if (n_steps < 1 || std::abs(n_steps * dt - cfg.numerics.t_end) > 1e-9 * cfg.numerics.t_end)
    throw ConfigError("numerics.t_end must be a whole number of dt steps");

  std::size_t next_profile = 0;
  auto capture_profiles = [&]() {
    while (next_profile < cfg.output.profile_times.size() &&
           cfg.output.profile_times[next_profile] <= st.t + 0.5 * dt) {
      result.profiles.push_back({cfg.output.profile_times[next_profile], st});
      ++next_profile;
    }
  };

  StepRecord rec = make_record(st, cfg, kin);
  result.series.push_back(rec);
  if (observer) observer(st, rec);
  capture_profiles();

  for (long long step = 0; step < n_steps; ++step) {
    try {
      march_step(st, cfg, kin);
    } catch (const RegimeExitError& e) {
      result.regime_exit = true;
      result.exit_t = e.t;
      result.exit_R = e.R;
      break;
    }
    ++result.steps;
    rec = make_record(st, cfg, kin);
    result.series.push_back(rec);
    if (observer) observer(st, rec);
    capture_profiles();
  }
  result.final_state = std::move(st);
  result.clamped = kin.clamp_count() - clamps_before;
  return result;
}

RunResult run_picard(const SimulationConfig& cfg, const KineticsModel& kin) {
  RunResult result;
  result.mode = "picard";
  const ModelParameters& p = cfg.model;
  const double T = cfg.numerics.t_end;
  const long clamps_before = kin.clamp_count();

  HBox box = cfg.make_hbox();
  double T1 = cfg.contraction_T1 > 0 ? cfg.contraction_T1 : T;
  ContractionReport rep =
      estimate_contraction(p, kin, cfg.bulk, box, std::max(T1, T), cfg.contraction);
  result.contraction = rep;
  const bool horizon_ok = rep.certified && T <= rep.T_guaranteed;
  if (!horizon_ok && !cfg.picard_allow_uncertified) {
    std::ostringstream msg;
    msg << "contraction estimate does not certify horizon T = " << T
        << " (T_guaranteed = " << rep.T_guaranteed << ", Lambda(T) = " << rep.lambda_at(T)
        << "); reduce t_end or set numerics.allow_uncertified = true";
    throw NonConvergenceError(msg.str());
  }

  PicardOptions opt = cfg.picard;
  opt.hbox = box;
  FieldBundle bundle = picard_solve(initial_bundle(opt.grid_points, T, p, cfg.bulk), p,
                                    kin, cfg.bulk, opt, result.picard_history);
  result.steps = result.picard_history.iterations;

  // Boundary velocity on each diagonal column from the converged bundle.
  const std::size_t N = bundle.N, n = p.n, m = p.m;
  std::vector<double> rm(n), rp(n), G(N);
  auto column_velocity = [&](std::size_t l) {
    for (std::size_t k = 0; k <= l; ++k) {
      const std::size_t idx = bundle.at(k, l);
      kin.growth_rates({bundle.x.data() + idx * n, n}, {bundle.s.data() + idx * m, m}, rm);
      kin.invasion_rates({bundle.psi.data() + idx * n, n}, {bundle.s.data() + idx * m, m},
                         rp);
      G[k] = growth_sum(rm, rp);
    }
    double P = 0.0;
    for (std::size_t k = 1; k <= l; ++k)
      P += 0.5 * (G[k - 1] + G[k]) *
           (cube(bundle.c[bundle.at(k, l)]) - cube(bundle.c[bundle.at(k - 1, l)])) / 3.0;
    const double R = bundle.radius(l);
    return R > 0 ? P / (R * R) : 0.0;
  };

  for (std::size_t l = 0; l < N; ++l) {
    StepRecord rec;
    rec.t = bundle.grid_time(l);
    rec.R = bundle.radius(l);
    RegimeStatus rs = classify_regime(cfg.bulk.Psi_at(rec.t), rec.R, p);
    rec.sigma_a = rs.sigma_a;
    rec.sigma_d = rs.sigma_d;
    rec.classification = rs.classification;
    rec.u_boundary = column_velocity(l);
    result.series.push_back(rec);
  }

  auto column_state = [&](std::size_t l) {
    GranuleState st;
    st.t = bundle.grid_time(l);
    st.R = bundle.radius(l);
    st.grid.t0.resize(l + 1);
    st.grid.c.resize(l + 1);
    st.grid.q.resize(l + 1);
    st.x.resize((l + 1) * n);
    st.s.resize((l + 1) * m);
    st.psi.resize((l + 1) * n);
    for (std::size_t k = 0; k <= l; ++k) {
      const std::size_t idx = bundle.at(k, l);
      st.grid.t0[k] = bundle.grid_time(k);
      st.grid.c[k] = bundle.c[idx];
      st.grid.q[k] = bundle.q[idx];
      for (std::size_t i = 0; i < n; ++i) st.x[k * n + i] = bundle.x[idx * n + i];
      for (std::size_t j = 0; j < m; ++j) st.s[k * m + j] = bundle.s[idx * m + j];
      for (std::size_t i = 0; i < n; ++i) st.psi[k * n + i] = bundle.psi[idx * n + i];
    }
    return st;
  };

  for (double pt : cfg.output.profile_times) {
    if (pt > T * (1 + 1e-12)) continue;
    auto l = static_cast<std::size_t>(std::llround(pt / T * double(N - 1)));
    result.profiles.push_back({pt, column_state(std::min(l, N - 1))});
  }
  result.final_state = column_state(N - 1);
  result.clamped = kin.clamp_count() - clamps_before;
  return result;
}

namespace {

std::string format_time_label(double t) {
  std::ostringstream os;
  os << t;
  std::string s = os.str();
  for (char& ch : s)
    if (ch == '.') ch = 'p';
  return s;
}

void write_profile_csv(const std::filesystem::path& path, const ProfileSnapshot& snap,
                       const SimulationConfig& cfg) {
  const std::size_t n = cfg.model.n, m = cfg.model.m;
  std::ofstream out(path);
  out << "t0,r";
  for (std::size_t i = 0; i < n; ++i) out << ",f_" << (i + 1);
  for (std::size_t j = 0; j < m; ++j) out << ",S_" << (j + 1);
  for (std::size_t i = 0; i < n; ++i) out << ",Psi_" << (i + 1);
  out << "\n";
  out.precision(17);
  const GranuleState& st = snap.state;
  for (std::size_t k = 0; k < st.grid.size(); ++k) {
    out << st.grid.t0[k] << "," << st.grid.c[k];
    for (std::size_t i = 0; i < n; ++i)
      out << "," << st.x[k * n + i] / cfg.model.rho[i];
    for (std::size_t j = 0; j < m; ++j) out << "," << st.s[k * m + j];
    for (std::size_t i = 0; i < n; ++i) out << "," << st.psi[k * n + i];
    out << "\n";
  }
}

}  // namespace

void write_outputs(const RunResult& result, const SimulationConfig& cfg,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream out(fs::path(out_dir) / "radius.csv");
    out << "t,R,sigma_a,sigma_d,u_boundary,regime\n";
    out.precision(17);
    for (const StepRecord& rec : result.series)
      out << rec.t << "," << rec.R << "," << rec.sigma_a << "," << rec.sigma_d << ","
          << rec.u_boundary << "," << classification_name(rec.classification) << "\n";
  }

  for (const ProfileSnapshot& snap : result.profiles)
    write_profile_csv(fs::path(out_dir) /
                          ("profile_" + format_time_label(snap.requested_time) + ".csv"),
                      snap, cfg);

  nlohmann::json j;
  j["mode"] = result.mode;
  j["steps"] = result.steps;
  j["t_final"] = result.series.empty() ? 0.0 : result.series.back().t;
  j["R_final"] = result.series.empty() ? 0.0 : result.series.back().R;
  j["clamped_rate_evaluations"] = result.clamped;
  j["regime_exit"] = result.regime_exit;
  if (result.regime_exit) {
    j["exit_t"] = result.exit_t;
    j["exit_R"] = result.exit_R;
  }
  j["status"] = result.regime_exit ? "regime_exit" : "completed";
  if (result.mode == "picard") {
    j["picard"] = {{"iterations", result.picard_history.iterations},
                   {"converged", result.picard_history.converged},
                   {"errors", result.picard_history.errors}};
  }
  if (result.contraction) {
    const ContractionReport& r = *result.contraction;
    j["contraction"] = {{"a", r.a},
                        {"b", r.b},
                        {"Lambda", r.Lambda},
                        {"T_guaranteed", r.T_guaranteed},
                        {"certified", r.certified},
                        {"samples", r.samples},
                        {"lambda_x", r.lambda_x},
                        {"lambda_s", r.lambda_s},
                        {"lambda_psi", r.lambda_psi},
                        {"lambda_c1", r.lambda_c1},
                        {"lambda_c2", r.lambda_c2},
                        {"lambda_c3", r.lambda_c3},
                        {"M_x", r.M_x},
                        {"M_s", r.M_s},
                        {"M_psi", r.M_psi},
                        {"M_c1", r.M_c1},
                        {"M_c2", r.M_c2}};
  }
  std::ofstream out(fs::path(out_dir) / "summary.json");
  out << j.dump(2) << "\n";
}

}  // namespace granule
