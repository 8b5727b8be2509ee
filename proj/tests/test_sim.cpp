#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "granule/simulate.hpp"
#include "granule/validate.hpp"

using namespace granule;

namespace {

SimulationConfig single_species(double mu, double v_a, double dt, double T) {
  SimulationConfig cfg;
  cfg.model.n = 1;
  cfg.model.m = 1;
  cfg.model.rho = {1.0};
  cfg.model.D_S = {1.0};
  cfg.model.D_Psi = {1.0};
  cfg.model.v_a = {v_a};
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

}  // namespace

TEST_CASE("zero growth marches the radius linearly") {
  SimulationConfig cfg = single_species(0.0, 0.1, 1e-2, 0.5);
  auto kin = cfg.make_kinetics();
  int observed = 0;
  RunResult r = run_marching(cfg, kin, [&](const GranuleState& st, const StepRecord& rec) {
    ++observed;
    CHECK(st.t == rec.t);
  });
  CHECK(r.steps == 50);
  CHECK(observed == 51);  // initial record + one per step
  for (const StepRecord& rec : r.series)
    CHECK(std::abs(rec.R - 0.1 * rec.t) <= 1e-12);
  CHECK(r.final_state.grid.size() == 51);
  CHECK_FALSE(r.regime_exit);
}

TEST_CASE("newborn nodes carry the boundary fractions") {
  SimulationConfig cfg = single_species(1.0, 0.1, 1e-2, 0.2);
  cfg.model.n = 2;
  cfg.model.rho = {1.0, 1.0};
  cfg.model.D_Psi = {1.0, 1.0};
  cfg.model.v_a = {1.0, 1.0};
  cfg.bulk.Psi_star = {TimeSeries(0.25), TimeSeries(0.75)};
  cfg.kinetics.mu_max = {1.0, 0.5};
  cfg.kinetics.K = {0.5, 0.5};
  cfg.kinetics.k_col = {0.0, 0.0};
  cfg.kinetics.growth_substrate = {0, 0};
  cfg.kinetics.yield = {0.3, 0.3};
  cfg.kinetics.rho = cfg.model.rho;
  auto kin = cfg.make_kinetics();
  run_marching(cfg, kin, [&](const GranuleState& st, const StepRecord&) {
    std::size_t k = st.grid.size() - 1;  // newest node
    CHECK(st.x[k * 2 + 0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(st.x[k * 2 + 1] == doctest::Approx(0.75).epsilon(1e-14));
  });
}

TEST_CASE("detachment triggers a recorded regime exit") {
  SimulationConfig cfg = single_species(3.0, 1.0, 1e-2, 3.0);
  cfg.model.delta = 0.5;
  cfg.numerics.regime = Regime::General;
  cfg.bulk.Psi_star = {TimeSeries(0.1)};  // sigma_a = 0.1
  auto kin = cfg.make_kinetics();
  RunResult r = run_marching(cfg, kin);
  CHECK(r.regime_exit);
  CHECK(r.exit_R >= std::sqrt(0.1 / 0.5) - 1e-2);
  CHECK(r.series.back().t < 3.0);
  // sigma_a - sigma_d was still positive at every recorded step entry.
  for (std::size_t i = 0; i + 1 < r.series.size(); ++i)
    CHECK(r.series[i].sigma_a - r.series[i].sigma_d > 0.0);
}

TEST_CASE("marching and picard runs agree on a certified problem") {
  SimulationConfig cfg = single_species(2.0, 0.1, 1e-3, 0.1);
  cfg.kinetics.K = {0.4};
  cfg.contraction_T1 = 0.5;  // h-box sized on a wider reference window
  cfg.output.profile_times = {0.1};
  auto kin = cfg.make_kinetics();
  RunResult march = run_marching(cfg, kin);
  RunResult pic = run_picard(cfg, kin);
  REQUIRE(pic.contraction.has_value());
  CHECK(pic.contraction->certified);
  CHECK(pic.picard_history.converged);
  double rel = std::abs(march.series.back().R - pic.series.back().R) /
               march.series.back().R;
  CHECK(rel <= 1e-3);
}

TEST_CASE("uncertified horizons are refused unless overridden") {
  SimulationConfig cfg = single_species(3.0, 0.5, 1e-2, 50.0);
  auto kin = cfg.make_kinetics();
  CHECK_THROWS_AS(run_picard(cfg, kin), NonConvergenceError);
}

TEST_CASE("outputs land on disk with the documented layout") {
  namespace fs = std::filesystem;
  SimulationConfig cfg = single_species(1.0, 0.1, 1e-2, 0.2);
  cfg.output.profile_times = {0.1, 0.2};
  auto kin = cfg.make_kinetics();
  RunResult r = run_marching(cfg, kin);
  CHECK(r.profiles.size() == 2);

  fs::path dir = fs::temp_directory_path() / "granule_test_outputs";
  fs::remove_all(dir);
  write_outputs(r, cfg, dir.string());
  CHECK(fs::exists(dir / "radius.csv"));
  CHECK(fs::exists(dir / "profile_0p1.csv"));
  CHECK(fs::exists(dir / "profile_0p2.csv"));
  CHECK(fs::exists(dir / "summary.json"));

  std::ifstream radius(dir / "radius.csv");
  std::string header;
  std::getline(radius, header);
  CHECK(header == "t,R,sigma_a,sigma_d,u_boundary,regime");

  std::ifstream profile(dir / "profile_0p2.csv");
  std::getline(profile, header);
  CHECK(header == "t0,r,f_1,S_1,Psi_1");

  nlohmann::json summary;
  std::ifstream(dir / "summary.json") >> summary;
  CHECK(summary["mode"] == "marching");
  CHECK(summary["status"] == "completed");
  CHECK(summary["steps"] == 20);
  fs::remove_all(dir);
}

TEST_CASE("t_end must be a whole number of steps") {
  SimulationConfig cfg = single_species(0.0, 0.1, 3e-3, 0.1);
  auto kin = cfg.make_kinetics();
  CHECK_THROWS_AS(run_marching(cfg, kin), ConfigError);
}

TEST_CASE("built-in validation suites pass") {
  for (const char* suite : {"analytic", "oracle", "invariants"}) {
    CAPTURE(suite);
    for (const auto& res : run_validation(suite)) {
      CAPTURE(res.name);
      CAPTURE(res.detail);
      CHECK(res.passed);
    }
  }
  CHECK_THROWS_AS(run_validation("bogus"), ConfigError);
}
