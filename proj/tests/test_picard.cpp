#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "granule/picard.hpp"

using namespace granule;

namespace {

struct Problem {
  ModelParameters p;
  BulkEnvironment bulk;
  MonodParameters mp;
};

Problem saturated(double mu, double v_a) {
  Problem pr;
  pr.p.n = 1;
  pr.p.m = 1;
  pr.p.rho = {1.0};
  pr.p.D_S = {1.0};
  pr.p.D_Psi = {1.0};
  pr.p.v_a = {v_a};
  pr.bulk.S_star = {TimeSeries(1.0)};
  pr.bulk.Psi_star = {TimeSeries(1.0)};
  pr.mp.mu_max = {mu};
  pr.mp.K = {1e-9};
  pr.mp.k_col = {0.0};
  pr.mp.growth_substrate = {0};
  pr.mp.yield = {0.0};
  pr.mp.rho = {1.0};
  return pr;
}

MonodKinetics make_kin(const Problem& pr) {
  return MonodKinetics(pr.mp, admissible_box(pr.p, pr.bulk, 10.0));
}

}  // namespace

TEST_CASE("initial bundle carries the reference functions") {
  Problem pr = saturated(1.0, 0.1);
  FieldBundle b = initial_bundle(9, 0.4, pr.p, pr.bulk);
  CHECK(b.N == 9);
  CHECK(b.T == 0.4);
  // c = Sigma(t0) = sigma_a t0 for constant bulk, q = sigma_a.
  for (std::size_t l = 0; l < b.N; ++l)
    for (std::size_t k = 0; k <= l; ++k) {
      CHECK(b.c[b.at(k, l)] == doctest::Approx(0.1 * b.grid_time(k)).epsilon(1e-14));
      CHECK(b.q[b.at(k, l)] == doctest::Approx(0.1).epsilon(1e-14));
      CHECK(b.x[b.at(k, l)] == doctest::Approx(1.0));
      CHECK(b.s[b.at(k, l)] == doctest::Approx(1.0));
    }
  CHECK_THROWS_AS(initial_bundle(2, 0.4, pr.p, pr.bulk), ConfigError);
  CHECK_THROWS_AS(initial_bundle(9, 0.0, pr.p, pr.bulk), ConfigError);
}

TEST_CASE("fixed point reproduces the constant-growth closed form") {
  // G = mu: R(t) = (3 sigma_a / mu)(e^{mu t / 3} - 1) and
  // c(t0, t) = R(t0) e^{mu (t - t0) / 3}.
  Problem pr = saturated(3.0, 0.1);
  auto kin = make_kin(pr);
  const double T = 0.15, mu = 3.0, sig = 0.1;

  PicardOptions opt;
  opt.grid_points = 129;
  PicardHistory hist;
  FieldBundle b = picard_solve(initial_bundle(opt.grid_points, T, pr.p, pr.bulk), pr.p,
                               kin, pr.bulk, opt, hist);
  CHECK(hist.converged);

  auto R_exact = [&](double t) { return (3.0 * sig / mu) * (std::exp(mu * t / 3.0) - 1.0); };
  const std::size_t N = b.N;
  for (std::size_t l = 0; l < N; l += 16) {
    double t = b.grid_time(l);
    CHECK(b.radius(l) == doctest::Approx(R_exact(t)).epsilon(1e-6));
    for (std::size_t k = 0; k <= l; k += 16) {
      double t0 = b.grid_time(k);
      double exact = R_exact(t0) * std::exp(mu * (t - t0) / 3.0);
      CHECK(b.c[b.at(k, l)] == doctest::Approx(exact).epsilon(1e-5).scale(1.0));
    }
  }
  // dc/dt0 along the first row off the diagonal: q(t0, t) tends to
  // sigma_a e^{mu (t - t0)/3} for constant growth... verified at the corner.
  CHECK(b.q[b.at(0, N - 1)] ==
        doctest::Approx(sig * std::exp(mu * T / 3.0)).epsilon(1e-4));
}

TEST_CASE("successive Picard errors contract faster than the certified rate") {
  Problem pr = saturated(2.0, 0.05);
  pr.mp.K = {0.4};
  pr.mp.k_col = {0.1};
  pr.mp.yield = {0.5};
  auto kin = make_kin(pr);
  const double T = 0.1;

  HBox box = default_hbox(pr.p, pr.bulk, 0.5);
  ContractionOptions copt;
  copt.samples = 2048;
  ContractionReport rep = estimate_contraction(pr.p, kin, pr.bulk, box, 0.5, copt);
  CHECK(rep.certified);
  CHECK(rep.T_guaranteed > T);
  double Lambda_T = rep.lambda_at(T);
  CHECK(Lambda_T < 1.0);

  PicardOptions opt;
  opt.grid_points = 65;
  opt.check_hbox = true;
  opt.hbox = box;
  PicardHistory hist;
  picard_solve(initial_bundle(opt.grid_points, T, pr.p, pr.bulk), pr.p, kin, pr.bulk,
               opt, hist);
  REQUIRE(hist.errors.size() >= 3);
  for (std::size_t i = 1; i + 1 < hist.errors.size(); ++i) {
    if (hist.errors[i] < 1e-13) break;  // at roundoff the ratio is meaningless
    CHECK(hist.errors[i + 1] / hist.errors[i] <= Lambda_T + 0.05);
  }
}

TEST_CASE("contraction estimate is deterministic and internally consistent") {
  Problem pr = saturated(1.0, 0.1);
  pr.mp.K = {0.5};
  auto kin = make_kin(pr);
  HBox box = default_hbox(pr.p, pr.bulk, 1.0);
  CHECK(box.h_c1 > 0);
  CHECK(box.h_c2 > 0);
  CHECK(box.c_floor > 0);

  ContractionOptions copt;
  copt.samples = 1024;
  ContractionReport a = estimate_contraction(pr.p, kin, pr.bulk, box, 1.0, copt);
  ContractionReport b = estimate_contraction(pr.p, kin, pr.bulk, box, 1.0, copt);
  CHECK(a.Lambda == b.Lambda);  // fixed seed
  CHECK(a.a >= 0);
  CHECK(a.b >= 0);
  CHECK(a.T_guaranteed > 0);
  CHECK(a.T_guaranteed <= 1.0);
  CHECK(a.lambda_at(a.T_guaranteed) == doctest::Approx(a.Lambda));
  if (a.certified) CHECK(a.Lambda < 1.0);
  // The quadratic-coefficient kernels: lambda_c1 and lambda_c2 share one
  // functional form, so the estimator reports them identically.
  CHECK(a.lambda_c1 == a.lambda_c2);
}

TEST_CASE("operator application rejects escapes from the h-box") {
  Problem pr = saturated(5.0, 0.5);  // strong growth
  auto kin = make_kin(pr);
  FieldBundle b = initial_bundle(33, 2.0, pr.p, pr.bulk);
  HBox tiny = default_hbox(pr.p, pr.bulk, 2.0);
  tiny.h_c1 = 1e-8;
  CHECK_THROWS_AS(
      apply_operator_A(b, pr.p, kin, pr.bulk, Regime::AttachmentOnly, &tiny),
      StateError);
  // Without the check the same application succeeds.
  CHECK_NOTHROW(apply_operator_A(b, pr.p, kin, pr.bulk, Regime::AttachmentOnly));
}

TEST_CASE("bundle distance is the sum of per-component maxima") {
  Problem pr = saturated(1.0, 0.1);
  FieldBundle a = initial_bundle(5, 0.2, pr.p, pr.bulk);
  FieldBundle b = a;
  CHECK(bundle_distance(a, b) == 0.0);
  b.c[b.at(1, 2)] += 0.25;
  b.x[b.at(0, 3)] += 0.5;
  CHECK(bundle_distance(a, b) == doctest::Approx(0.75));
}
