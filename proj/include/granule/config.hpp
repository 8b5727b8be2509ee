#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "granule/characteristics.hpp"
#include "granule/elliptic.hpp"
#include "granule/freeboundary.hpp"
#include "granule/kinetics.hpp"
#include "granule/model.hpp"
#include "granule/picard.hpp"

namespace granule {

/// Value of one config key: scalar or (possibly nested) array.
struct ConfigValue {
  std::variant<bool, std::int64_t, double, std::string, std::vector<ConfigValue>> v;

  bool is_array() const { return std::holds_alternative<std::vector<ConfigValue>>(v); }
  double as_double(const std::string& where) const;
  std::int64_t as_int(const std::string& where) const;
  bool as_bool(const std::string& where) const;
  const std::string& as_string(const std::string& where) const;
  const std::vector<ConfigValue>& as_array(const std::string& where) const;
};

/// Parsed config file: table name -> key -> value. Supports the TOML subset
/// used by the simulator: [table] headers, key = value lines with integers,
/// floats, booleans, quoted strings, and (nested) arrays, plus # comments.
using ConfigTable = std::map<std::string, std::map<std::string, ConfigValue>>;

ConfigTable parse_config_text(const std::string& text);
ConfigTable parse_config_file(const std::string& path);

struct NumericsOptions {
  double dt = 1e-3;
  double t_end = 1.0;
  Formulation formulation = Formulation::Cubic;
  Regime regime = Regime::AttachmentOnly;
  EllipticOptions elliptic;
};

struct OutputOptions {
  std::vector<double> profile_times;
};

/// Everything needed to run a simulation, assembled from a config file.
struct SimulationConfig {
  ModelParameters model;
  MonodParameters kinetics;
  BulkEnvironment bulk;
  NumericsOptions numerics;
  PicardOptions picard;
  bool picard_allow_uncertified = false;
  ContractionOptions contraction;
  double contraction_T1 = 0.0;  // defaults to t_end
  std::optional<HBox> hbox_override;
  OutputOptions output;

  MonodKinetics make_kinetics() const;
  HBox make_hbox() const;
};

SimulationConfig load_simulation_config(const std::string& path);
SimulationConfig build_simulation_config(const ConfigTable& table);

/// Overrides `section.key` with a numeric value (used by the sweep command).
void override_numeric(ConfigTable& table, const std::string& dotted_key, double value);

}  // namespace granule
