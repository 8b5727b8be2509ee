#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "granule/config.hpp"
#include "granule/simulate.hpp"
#include "granule/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitRegime = 4;
constexpr int kExitValidation = 5;

int run_command(const std::string& config_path, const std::string& mode,
                const std::string& out_dir) {
  granule::SimulationConfig cfg = granule::load_simulation_config(config_path);
  auto kin = cfg.make_kinetics();
  granule::RunResult result = mode == "picard" ? granule::run_picard(cfg, kin)
                                               : granule::run_marching(cfg, kin);
  granule::write_outputs(result, cfg, out_dir);
  if (result.regime_exit) {
    std::cerr << "regime exit: sigma_a - sigma_d <= 0 at t = " << result.exit_t
              << ", R = " << result.exit_R << "\n";
    return kExitRegime;
  }
  std::cout << "completed: t = " << result.series.back().t
            << ", R = " << result.series.back().R << " (" << result.mode << ", "
            << result.steps << (mode == "picard" ? " iterations" : " steps") << ")\n";
  return kExitOk;
}

int contraction_command(const std::string& config_path, const std::string& out_path) {
  granule::SimulationConfig cfg = granule::load_simulation_config(config_path);
  auto kin = cfg.make_kinetics();
  double T1 = cfg.contraction_T1 > 0 ? cfg.contraction_T1 : cfg.numerics.t_end;
  granule::ContractionReport rep = granule::estimate_contraction(
      cfg.model, kin, cfg.bulk, cfg.make_hbox(), T1, cfg.contraction);

  nlohmann::json j;
  j["a"] = rep.a;
  j["b"] = rep.b;
  j["T1"] = rep.T1;
  j["T_guaranteed"] = rep.T_guaranteed;
  j["Lambda"] = rep.Lambda;
  j["certified"] = rep.certified;
  j["samples"] = rep.samples;
  j["lambda_x"] = rep.lambda_x;
  j["lambda_s"] = rep.lambda_s;
  j["lambda_psi"] = rep.lambda_psi;
  j["lambda_c1"] = rep.lambda_c1;
  j["lambda_c2"] = rep.lambda_c2;
  j["lambda_c3"] = rep.lambda_c3;
  j["M_x"] = rep.M_x;
  j["M_s"] = rep.M_s;
  j["M_psi"] = rep.M_psi;
  j["M_c1"] = rep.M_c1;
  j["M_c2"] = rep.M_c2;
  std::string text = j.dump(2);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << text << "\n";
  }
  std::cout << text << "\n";
  std::cout << (rep.certified
                    ? "contraction certified up to T = " + std::to_string(rep.T_guaranteed)
                    : std::string("contraction NOT certified"))
            << "\n";
  return kExitOk;
}

int validate_command(const std::string& suite) {
  auto results = granule::run_validation(suite);
  bool all_ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.detail
              << ")\n";
    all_ok = all_ok && r.passed;
  }
  return all_ok ? kExitOk : kExitValidation;
}

int sweep_command(const std::string& config_path, const std::string& param,
                  const std::vector<double>& values, const std::string& out_dir) {
  if (values.empty()) throw granule::ConfigError("sweep needs at least one --values entry");
  granule::ConfigTable base = granule::parse_config_file(config_path);
  std::filesystem::create_directories(out_dir);
  std::ofstream table(std::filesystem::path(out_dir) / "sweep.csv");
  table << param << ",status,t_final,R_final\n";
  table.precision(17);
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    granule::ConfigTable tab = base;
    granule::override_numeric(tab, param, values[idx]);
    granule::SimulationConfig cfg = granule::build_simulation_config(tab);
    auto kin = cfg.make_kinetics();
    granule::RunResult result = granule::run_marching(cfg, kin);
    std::string sub = (std::filesystem::path(out_dir) /
                       ("case_" + std::to_string(idx)))
                          .string();
    granule::write_outputs(result, cfg, sub);
    table << values[idx] << "," << (result.regime_exit ? "regime_exit" : "completed")
          << "," << result.series.back().t << "," << result.series.back().R << "\n";
  }
  std::cout << "sweep finished: " << values.size() << " cases in " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"granulesim: spherical free-boundary granular biofilm simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", mode = "marching", suite = "all";
  std::string contraction_out, sweep_param;
  std::vector<double> sweep_values;

  auto* run = app.add_subcommand("run", "Run a simulation from a config file");
  run->add_option("--config", config_path, "TOML config file")->required();
  run->add_option("--mode", mode, "marching or picard")
      ->check(CLI::IsMember({"marching", "picard"}));
  run->add_option("--out", out_dir, "output directory");

  auto* contraction =
      app.add_subcommand("contraction", "Estimate the fixed-point contraction constants");
  contraction->add_option("--config", config_path, "TOML config file")->required();
  contraction->add_option("--out", contraction_out, "optional JSON report path");

  auto* validate = app.add_subcommand("validate", "Run built-in self checks");
  validate->add_option("--suite", suite, "analytic, oracle, invariants, or all")
      ->check(CLI::IsMember({"analytic", "oracle", "invariants", "all"}));

  auto* sweep = app.add_subcommand("sweep", "Run a marching sweep over one numeric key");
  sweep->add_option("--config", config_path, "TOML config file")->required();
  sweep->add_option("--param", sweep_param, "dotted config key, e.g. model.delta")
      ->required();
  sweep->add_option("--values", sweep_values, "values to sweep")->required();
  sweep->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return run_command(config_path, mode, out_dir);
    if (contraction->parsed()) return contraction_command(config_path, contraction_out);
    if (validate->parsed()) return validate_command(suite);
    if (sweep->parsed()) return sweep_command(config_path, sweep_param, sweep_values, out_dir);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const granule::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const granule::RegimeExitError& e) {
    std::cerr << "regime exit: " << e.what() << "\n";
    return kExitRegime;
  } catch (const granule::NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const granule::StateError& e) {
    std::cerr << "state error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
