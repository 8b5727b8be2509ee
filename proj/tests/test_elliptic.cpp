#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "granule/elliptic.hpp"

using namespace granule;

namespace {

CharacteristicGrid uniform_grid(std::size_t K, double R) {
  CharacteristicGrid g;
  g.t0.resize(K);
  g.c.resize(K);
  g.q.assign(K, R);  // consistent with c(t0) = R t0
  for (std::size_t k = 0; k < K; ++k) {
    g.t0[k] = double(k) / double(K - 1);
    g.c[k] = R * double(k) / double(K - 1);
  }
  return g;
}

}  // namespace

TEST_CASE("constant consumption has the parabolic closed form") {
  // D Laplacian s = k with s(R) = S* and s'(0) = 0 gives
  // s(r) = S* - k (R^2 - r^2) / (6 D).
  const double S_star = 10.0, k_rate = 0.6, R = 1.0, D = 1.0;
  auto grid = uniform_grid(101, R);
  std::vector<double> field;
  double Dv = D, dir = S_star;
  solve_elliptic(
      grid, {&Dv, 1}, {&dir, 1},
      [&](std::size_t, std::span<const double>, std::span<double> out) {
        out[0] = -k_rate;
      },
      field, EllipticOptions{});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double exact = S_star - k_rate * (R * R - grid.c[k] * grid.c[k]) / (6.0 * D);
    CHECK(field[k] == doctest::Approx(exact).epsilon(1e-10));
  }
  CHECK(field[0] == doctest::Approx(9.9).epsilon(1e-9));
}

TEST_CASE("finite-difference oracle reproduces the closed form") {
  const double S_star = 10.0, k_rate = 0.6, R = 1.0, D = 1.0;
  auto y = fd_oracle(400, R, D, S_star, [&](double, double) { return -k_rate; });
  const double h = R / 400.0;
  for (std::size_t i = 0; i <= 400; i += 40) {
    double r = double(i) * h;
    double exact = S_star - k_rate * (R * R - r * r) / (6.0 * D);
    CHECK(y[i] == doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("integral solve matches the oracle for nonlinear Monod consumption") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int draw = 0; draw < 5; ++draw) {
    const double R = 0.5 + unif(rng);
    const double D = 0.3 + unif(rng);
    const double S_star = 0.5 + 2.0 * unif(rng);
    const double mu = 0.5 + 2.0 * unif(rng);
    const double K = 0.1 + unif(rng);
    const double yield = 0.2 + 0.6 * unif(rng);
    const double x_val = 0.2 + 0.7 * unif(rng);
    CAPTURE(draw);

    const std::size_t nodes = 161;
    auto grid = uniform_grid(nodes, R);
    std::vector<double> field;
    double Dv = D, dir = S_star;
    auto consumption = [&](double s) {
      double sv = std::max(s, 0.0);
      return -yield * mu * sv / (K + sv) * x_val;
    };
    solve_elliptic(
        grid, {&Dv, 1}, {&dir, 1},
        [&](std::size_t, std::span<const double> s, std::span<double> out) {
          out[0] = consumption(s[0]);
        },
        field, EllipticOptions{});

    auto y = fd_oracle(nodes - 1, R, D, S_star,
                       [&](double s, double) { return consumption(s); });
    double max_gap = 0.0;
    for (std::size_t k = 0; k < nodes; ++k)
      max_gap = std::max(max_gap, std::abs(field[k] - y[k]));
    CHECK(max_gap <= 1e-4 * S_star);
  }
}

TEST_CASE("degenerate grids fall back to the bulk values") {
  auto grid = uniform_grid(2, 1e-6);
  std::vector<double> field;
  double Dv = 1.0, dir = 3.0;
  auto report = solve_elliptic(
      grid, {&Dv, 1}, {&dir, 1},
      [&](std::size_t, std::span<const double>, std::span<double> out) { out[0] = -1.0; },
      field, EllipticOptions{});
  CHECK(report.iterations == 0);
  CHECK(field[0] == 3.0);
  CHECK(field[1] == 3.0);
}

TEST_CASE("non-convergent solves raise with a residual history") {
  auto grid = uniform_grid(51, 1.0);
  std::vector<double> field;
  double Dv = 1.0, dir = 1.0;
  EllipticOptions opt;
  opt.max_iter = 3;
  opt.damping = 1.0;
  // Strong positive feedback: the undamped fixed-point map diverges.
  try {
    solve_elliptic(
        grid, {&Dv, 1}, {&dir, 1},
        [&](std::size_t, std::span<const double> s, std::span<double> out) {
          out[0] = 100.0 * s[0];
        },
        field, opt);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.residual_history.size() == 3);
  }
}

TEST_CASE("multi-field solve handles independent substrates at once") {
  const double R = 1.0;
  auto grid = uniform_grid(81, R);
  std::vector<double> D{1.0, 2.0}, dir{4.0, 8.0}, field;
  solve_elliptic(
      grid, D, dir,
      [&](std::size_t, std::span<const double>, std::span<double> out) {
        out[0] = -0.6;
        out[1] = -1.2;
      },
      field, EllipticOptions{});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double r2 = grid.c[k] * grid.c[k];
    CHECK(field[k * 2 + 0] ==
          doctest::Approx(4.0 - 0.6 * (R * R - r2) / 6.0).epsilon(1e-10));
    CHECK(field[k * 2 + 1] ==
          doctest::Approx(8.0 - 1.2 * (R * R - r2) / 12.0).epsilon(1e-10));
  }
}
