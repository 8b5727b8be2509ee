#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "granule/characteristics.hpp"
#include "support/ode_oracle.hpp"

using namespace granule;

namespace {

// Single species, saturated Monod: specific growth rate ~ mu_max.
struct Setup {
  ModelParameters p;
  MonodParameters mp;
};

Setup saturated(double mu) {
  Setup s;
  s.p.n = 1;
  s.p.m = 1;
  s.p.rho = {1.0};
  s.p.D_S = {1.0};
  s.p.D_Psi = {1.0};
  s.p.v_a = {0.1};
  s.mp.mu_max = {mu};
  s.mp.K = {1e-9};
  s.mp.k_col = {0.0};
  s.mp.growth_substrate = {0};
  s.mp.yield = {0.0};
  s.mp.rho = {1.0};
  return s;
}

CharacteristicGrid uniform_grid(std::size_t K, double R) {
  CharacteristicGrid g;
  g.t0.resize(K);
  g.c.resize(K);
  g.q.assign(K, 1.0);
  for (std::size_t k = 0; k < K; ++k) {
    g.t0[k] = double(k) / double(K - 1);
    g.c[k] = R * double(k) / double(K - 1);
  }
  return g;
}

GranuleState state_on(CharacteristicGrid g, const Setup& s, double x_val, double s_val) {
  GranuleState st;
  st.grid = std::move(g);
  st.R = st.grid.c.back();
  const std::size_t K = st.grid.size();
  st.x.assign(K, x_val);
  st.s.assign(K, s_val);
  st.psi.assign(K, 0.0);
  return st;
}

}  // namespace

TEST_CASE("velocity profile is u = G r / 3 for constant growth") {
  // For G constant the integral (1/r^2) int_0^r G rho^2 drho = G r / 3 and the
  // cubic-variable trapezoid reproduces it exactly on any mesh.
  auto grid = uniform_grid(33, 2.0);
  std::vector<double> G(33, 1.8);
  auto u = velocity_profile(grid, G);
  CHECK(u[0] == 0.0);
  for (std::size_t k = 1; k < grid.size(); ++k)
    CHECK(u[k] == doctest::Approx(1.8 * grid.c[k] / 3.0).epsilon(1e-14));
}

TEST_CASE("center velocity limit u/c -> G/3") {
  auto grid = uniform_grid(201, 1.0);
  std::vector<double> G(201);
  for (std::size_t k = 0; k < G.size(); ++k) G[k] = 2.0 + grid.c[k];  // varying growth
  auto u = velocity_profile(grid, G);
  CHECK(u[0] == 0.0);
  double ratio = u[1] / grid.c[1];
  CHECK(std::abs(ratio - G[0] / 3.0) <= 1e-3);
  CHECK(center_velocity_gradient(G[0]) == doctest::Approx(G[0] / 3.0));
}

TEST_CASE("monotonicity check flags crossings and bad dc/dt0") {
  auto grid = uniform_grid(5, 1.0);
  CHECK_NOTHROW(grid.check_monotone());
  grid.c[3] = grid.c[2];
  CHECK_THROWS_AS(grid.check_monotone(), StateError);
  grid = uniform_grid(5, 1.0);
  grid.q[2] = 0.0;
  CHECK_THROWS_AS(grid.check_monotone(), StateError);
}

TEST_CASE("characteristics follow c = R(t0) exp(mu (t - t0) / 3) under constant growth") {
  // Constant G = mu: each node obeys dc/dt = mu c / 3.
  Setup s = saturated(3.0);
  MonodKinetics kin(s.mp, AdmissibleBox{1.0, 1.0, 1.0});

  for (Formulation form : {Formulation::Direct, Formulation::Cubic}) {
    CAPTURE(form == Formulation::Direct ? "direct" : "cubic");
    GranuleState st = state_on(uniform_grid(41, 0.5), s, 1.0, 1.0);
    const double dt = 1e-3;
    const int steps = 200;
    std::vector<double> c0 = st.grid.c;
    for (int step = 0; step < steps; ++step) st.grid = advance(st, s.p, kin, dt, form);
    const double factor = std::exp(3.0 * dt * steps / 3.0);
    for (std::size_t k = 0; k < st.grid.size(); ++k)
      CHECK(st.grid.c[k] == doctest::Approx(c0[k] * factor).epsilon(1e-6));
    // dc/dt0 obeys the same exponential along each characteristic.
    for (std::size_t k = 1; k < st.grid.size(); ++k)
      CHECK(st.grid.q[k] == doctest::Approx(1.0 * factor).epsilon(1e-6));
  }
}

TEST_CASE("direct and cubic formulations agree on smooth runs") {
  Setup s = saturated(2.0);
  s.mp.K = {0.4};  // genuinely nonlinear growth in s
  MonodKinetics kin(s.mp, AdmissibleBox{1.0, 2.0, 1.0});

  GranuleState direct_st = state_on(uniform_grid(61, 0.3), s, 0.9, 1.3);
  GranuleState cubic_st = direct_st;
  const double dt = 5e-4;
  for (int step = 0; step < 400; ++step) {
    direct_st.grid = advance(direct_st, s.p, kin, dt, Formulation::Direct);
    cubic_st.grid = advance(cubic_st, s.p, kin, dt, Formulation::Cubic);
  }
  for (std::size_t k = 0; k < direct_st.grid.size(); ++k) {
    CHECK(cubic_st.grid.c[k] ==
          doctest::Approx(direct_st.grid.c[k]).epsilon(1e-6).scale(1.0));
    CHECK(cubic_st.grid.q[k] ==
          doctest::Approx(direct_st.grid.q[k]).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("node trajectories match an adaptive ODE oracle") {
  // Nonlinear, space-varying growth: x decays along characteristics with
  // F = rho r_M - x G, so G varies in time; compare a node position against
  // the independent Runge-Kutta oracle on the reduced ODE system.
  Setup s = saturated(1.5);
  MonodKinetics kin(s.mp, AdmissibleBox{1.0, 1.0, 1.0});

  // Uniform composition x = 0.7 < rho: G = mu theta x evolves logistically
  // through F = rho r_M - x G, and u(c) = G c / 3 since G is uniform in space.
  GranuleState st = state_on(uniform_grid(41, 0.5), s, 0.7, 1.0);
  const double dt = 1e-3;
  const int steps = 300;
  GranuleState cur = st;
  for (int step = 0; step < steps; ++step) {
    auto new_grid = advance(cur, s.p, kin, dt, Formulation::Cubic);
    cur.x = advance_sessile(cur, s.p, kin, dt);
    cur.grid = std::move(new_grid);
  }

  const std::size_t probe = 30;
  const double theta = 1.0 / (1e-9 + 1.0);
  auto rhs = [&](double, const std::vector<double>& y, std::vector<double>& dy) {
    // y = (c, q, x); G = mu theta x / rho.
    double G = 1.5 * theta * y[2];
    dy[0] = G * y[0] / 3.0;              // u(c) = G c / 3 (uniform composition)
    dy[1] = (G - 2.0 * G / 3.0) * y[1];  // dq/dt = (G - 2u/c) q
    dy[2] = 1.5 * theta * y[2] - y[2] * G;
  };
  auto ref = testsupport::integrate_ode(rhs, {st.grid.c[probe], 1.0, 0.7}, 0.0,
                                        dt * steps);
  CHECK(cur.grid.c[probe] == doctest::Approx(ref[0]).epsilon(1e-6));
  CHECK(cur.grid.q[probe] == doctest::Approx(ref[1]).epsilon(1e-6));
  CHECK(cur.x[probe] == doctest::Approx(ref[2]).epsilon(1e-6));
}

TEST_CASE("sessile bounds violations are detected") {
  Setup s = saturated(0.0);
  MonodKinetics kin(s.mp, AdmissibleBox{1.0, 1.0, 1.0});
  GranuleState st = state_on(uniform_grid(5, 0.1), s, 1.5, 1.0);  // x > rho
  CHECK_THROWS_AS(advance_sessile(st, s.p, kin, 0.1), StateError);
}
