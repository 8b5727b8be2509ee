#include "granule/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace granule {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Removes a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

ConfigValue parse_value(const std::string& raw, const std::string& where);

// Splits a bracketed array body at top-level commas.
std::vector<ConfigValue> parse_array(const std::string& body, const std::string& where) {
  std::vector<ConfigValue> out;
  int depth = 0;
  bool in_string = false;
  std::string current;
  auto flush = [&]() {
    std::string item = trim(current);
    if (!item.empty()) out.push_back(parse_value(item, where));
    current.clear();
  };
  for (char ch : body) {
    if (ch == '"') in_string = !in_string;
    if (!in_string) {
      if (ch == '[') ++depth;
      if (ch == ']') --depth;
      if (ch == ',' && depth == 0) {
        flush();
        continue;
      }
    }
    current += ch;
  }
  flush();
  return out;
}

ConfigValue parse_value(const std::string& raw, const std::string& where) {
  std::string v = trim(raw);
  if (v.empty()) throw ConfigError("empty value for " + where);
  if (v.front() == '[') {
    if (v.back() != ']') throw ConfigError("unterminated array for " + where);
    return ConfigValue{parse_array(v.substr(1, v.size() - 2), where)};
  }
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ConfigError("unterminated string for " + where);
    return ConfigValue{v.substr(1, v.size() - 2)};
  }
  if (v == "true") return ConfigValue{true};
  if (v == "false") return ConfigValue{false};
  const bool looks_float =
      v.find_first_of(".eE") != std::string::npos || v.find("inf") != std::string::npos ||
      v.find("nan") != std::string::npos;
  char* end = nullptr;
  if (!looks_float) {
    long long iv = std::strtoll(v.c_str(), &end, 10);
    if (end && *end == '\0') return ConfigValue{static_cast<std::int64_t>(iv)};
  }
  double dv = std::strtod(v.c_str(), &end);
  if (!end || *end != '\0')
    throw ConfigError("cannot parse value '" + v + "' for " + where);
  return ConfigValue{dv};
}

}  // namespace

double ConfigValue::as_double(const std::string& where) const {
  if (auto* d = std::get_if<double>(&v)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw ConfigError(where + " must be a number");
}

std::int64_t ConfigValue::as_int(const std::string& where) const {
  if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw ConfigError(where + " must be an integer");
}

bool ConfigValue::as_bool(const std::string& where) const {
  if (auto* b = std::get_if<bool>(&v)) return *b;
  throw ConfigError(where + " must be a boolean");
}

const std::string& ConfigValue::as_string(const std::string& where) const {
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError(where + " must be a string");
}

const std::vector<ConfigValue>& ConfigValue::as_array(const std::string& where) const {
  if (auto* a = std::get_if<std::vector<ConfigValue>>(&v)) return *a;
  throw ConfigError(where + " must be an array");
}

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable table;
  std::istringstream in(text);
  std::string line, current = "";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed table header");
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty table name");
      table[current];  // create the table even if it stays empty
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    std::string where = current.empty() ? key : current + "." + key;
    table[current][key] = parse_value(line.substr(eq + 1), where);
  }
  return table;
}

ConfigTable parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

const ConfigValue* find(const ConfigTable& t, const std::string& sec,
                        const std::string& key) {
  auto st = t.find(sec);
  if (st == t.end()) return nullptr;
  auto kt = st->second.find(key);
  if (kt == st->second.end()) return nullptr;
  return &kt->second;
}

const ConfigValue& require(const ConfigTable& t, const std::string& sec,
                           const std::string& key) {
  const ConfigValue* v = find(t, sec, key);
  if (!v) throw ConfigError("missing required config key " + sec + "." + key);
  return *v;
}

std::vector<double> double_array(const ConfigValue& v, const std::string& where,
                                 std::size_t expected = 0) {
  const auto& arr = v.as_array(where);
  std::vector<double> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(arr[i].as_double(where + "[" + std::to_string(i) + "]"));
  if (expected && out.size() != expected)
    throw ConfigError(where + " must have " + std::to_string(expected) + " entries");
  return out;
}

double get_double(const ConfigTable& t, const std::string& sec, const std::string& key,
                  double def) {
  const ConfigValue* v = find(t, sec, key);
  return v ? v->as_double(sec + "." + key) : def;
}

std::int64_t get_int(const ConfigTable& t, const std::string& sec, const std::string& key,
                     std::int64_t def) {
  const ConfigValue* v = find(t, sec, key);
  return v ? v->as_int(sec + "." + key) : def;
}

bool get_bool(const ConfigTable& t, const std::string& sec, const std::string& key,
              bool def) {
  const ConfigValue* v = find(t, sec, key);
  return v ? v->as_bool(sec + "." + key) : def;
}

std::string get_string(const ConfigTable& t, const std::string& sec,
                       const std::string& key, const std::string& def) {
  const ConfigValue* v = find(t, sec, key);
  return v ? v->as_string(sec + "." + key) : def;
}

// Bulk series: either `name` (constant array, one entry per field) or
// `name_times` + `name_values` (array of arrays, one series per field).
std::vector<TimeSeries> bulk_series(const ConfigTable& t, const std::string& name,
                                    std::size_t count) {
  const std::string where = "bulk." + name;
  const ConfigValue* times_v = find(t, "bulk", name + "_times");
  const ConfigValue* values_v = find(t, "bulk", name + "_values");
  if (times_v || values_v) {
    if (!times_v || !values_v)
      throw ConfigError(where + "_times and " + where + "_values must appear together");
    const auto& ta = times_v->as_array(where + "_times");
    const auto& va = values_v->as_array(where + "_values");
    if (ta.size() != count || va.size() != count)
      throw ConfigError(where + "_times/_values must have " + std::to_string(count) +
                        " series");
    std::vector<TimeSeries> out;
    for (std::size_t f = 0; f < count; ++f)
      out.emplace_back(double_array(ta[f], where + "_times"),
                       double_array(va[f], where + "_values"));
    return out;
  }
  auto vals = double_array(require(t, "bulk", name), where, count);
  std::vector<TimeSeries> out;
  for (double v : vals) out.emplace_back(v);
  return out;
}

}  // namespace

SimulationConfig build_simulation_config(const ConfigTable& t) {
  SimulationConfig cfg;

  auto n = get_int(t, "model", "species", 0);
  auto m = get_int(t, "model", "substrates", 0);
  if (n <= 0 || m <= 0)
    throw ConfigError("model.species and model.substrates must be positive");
  cfg.model.n = static_cast<std::size_t>(n);
  cfg.model.m = static_cast<std::size_t>(m);
  cfg.model.rho = double_array(require(t, "model", "rho"), "model.rho", cfg.model.n);
  cfg.model.D_S = double_array(require(t, "model", "D_S"), "model.D_S", cfg.model.m);
  cfg.model.D_Psi =
      double_array(require(t, "model", "D_Psi"), "model.D_Psi", cfg.model.n);
  cfg.model.v_a = double_array(require(t, "model", "v_a"), "model.v_a", cfg.model.n);
  cfg.model.delta = get_double(t, "model", "delta", 0.0);
  cfg.model.validate();

  cfg.bulk.S_star = bulk_series(t, "S_star", cfg.model.m);
  cfg.bulk.Psi_star = bulk_series(t, "Psi_star", cfg.model.n);

  std::string ktype = get_string(t, "kinetics", "type", "monod");
  if (ktype != "monod")
    throw ConfigError("kinetics.type: only \"monod\" is supported, got \"" + ktype + "\"");
  cfg.kinetics.mu_max =
      double_array(require(t, "kinetics", "mu_max"), "kinetics.mu_max", cfg.model.n);
  cfg.kinetics.K = double_array(require(t, "kinetics", "K"), "kinetics.K", cfg.model.n);
  cfg.kinetics.k_col =
      double_array(require(t, "kinetics", "k_col"), "kinetics.k_col", cfg.model.n);
  cfg.kinetics.rho = cfg.model.rho;
  if (const ConfigValue* gs = find(t, "kinetics", "growth_substrate")) {
    const auto& arr = gs->as_array("kinetics.growth_substrate");
    if (arr.size() != cfg.model.n)
      throw ConfigError("kinetics.growth_substrate must have one entry per species");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      auto idx = arr[i].as_int("kinetics.growth_substrate");
      if (idx < 1 || static_cast<std::size_t>(idx) > cfg.model.m)
        throw ConfigError("kinetics.growth_substrate entries are 1-based substrate "
                          "indices");
      cfg.kinetics.growth_substrate.push_back(static_cast<std::size_t>(idx - 1));
    }
  }
  {
    const auto& rows = require(t, "kinetics", "yield").as_array("kinetics.yield");
    if (rows.size() != cfg.model.m)
      throw ConfigError("kinetics.yield must have one row per substrate");
    for (std::size_t j = 0; j < rows.size(); ++j) {
      auto row = double_array(rows[j], "kinetics.yield row", cfg.model.n);
      cfg.kinetics.yield.insert(cfg.kinetics.yield.end(), row.begin(), row.end());
    }
  }

  cfg.numerics.dt = get_double(t, "numerics", "dt", 1e-3);
  cfg.numerics.t_end = get_double(t, "numerics", "t_end", 1.0);
  if (!(cfg.numerics.dt > 0) || !(cfg.numerics.t_end > 0))
    throw ConfigError("numerics.dt and numerics.t_end must be positive");
  std::string form = get_string(t, "numerics", "formulation", "cubic");
  if (form == "cubic")
    cfg.numerics.formulation = Formulation::Cubic;
  else if (form == "direct")
    cfg.numerics.formulation = Formulation::Direct;
  else
    throw ConfigError("numerics.formulation must be \"cubic\" or \"direct\"");
  std::string regime = get_string(t, "numerics", "regime", "attachment_only");
  if (regime == "attachment_only")
    cfg.numerics.regime = Regime::AttachmentOnly;
  else if (regime == "general")
    cfg.numerics.regime = Regime::General;
  else
    throw ConfigError("numerics.regime must be \"attachment_only\" or \"general\"");
  cfg.numerics.elliptic.tol = get_double(t, "numerics", "elliptic_tol", 1e-8);
  cfg.numerics.elliptic.max_iter =
      static_cast<int>(get_int(t, "numerics", "elliptic_max_iter", 200));
  cfg.numerics.elliptic.damping = get_double(t, "numerics", "elliptic_damping", 0.5);

  cfg.picard.grid_points =
      static_cast<std::size_t>(get_int(t, "numerics", "picard_grid", 129));
  cfg.picard.tol = get_double(t, "numerics", "picard_tol", 1e-10);
  cfg.picard.max_iter = static_cast<int>(get_int(t, "numerics", "picard_max_iter", 60));
  cfg.picard.regime = cfg.numerics.regime;
  cfg.picard.check_hbox = get_bool(t, "numerics", "horizon_check", true);
  cfg.picard_allow_uncertified = get_bool(t, "numerics", "allow_uncertified", false);

  cfg.contraction.samples =
      static_cast<std::size_t>(get_int(t, "contraction", "samples", 4096));
  cfg.contraction.seed =
      static_cast<unsigned>(get_int(t, "contraction", "seed", 20240817));
  cfg.contraction_T1 = get_double(t, "contraction", "T1", cfg.numerics.t_end);
  bool any_h = false;
  HBox box;
  if (const ConfigValue* v = find(t, "contraction", "h_x")) {
    box.h_x = double_array(*v, "contraction.h_x", cfg.model.n);
    any_h = true;
  }
  if (const ConfigValue* v = find(t, "contraction", "h_s")) {
    box.h_s = double_array(*v, "contraction.h_s", cfg.model.m);
    any_h = true;
  }
  if (const ConfigValue* v = find(t, "contraction", "h_psi")) {
    box.h_psi = double_array(*v, "contraction.h_psi", cfg.model.n);
    any_h = true;
  }
  if (find(t, "contraction", "h_c1") || find(t, "contraction", "h_c2") ||
      find(t, "contraction", "c_floor"))
    any_h = true;
  if (any_h) {
    HBox base = default_hbox(cfg.model, cfg.bulk, cfg.contraction_T1);
    if (box.h_x.empty()) box.h_x = base.h_x;
    if (box.h_s.empty()) box.h_s = base.h_s;
    if (box.h_psi.empty()) box.h_psi = base.h_psi;
    box.h_c1 = get_double(t, "contraction", "h_c1", base.h_c1);
    box.h_c2 = get_double(t, "contraction", "h_c2", base.h_c2);
    box.c_floor = get_double(t, "contraction", "c_floor", base.c_floor);
    cfg.hbox_override = box;
  }

  if (const ConfigValue* v = find(t, "output", "profile_times"))
    cfg.output.profile_times = double_array(*v, "output.profile_times");
  std::sort(cfg.output.profile_times.begin(), cfg.output.profile_times.end());

  cfg.bulk.validate(cfg.model, cfg.numerics.t_end);
  return cfg;
}

SimulationConfig load_simulation_config(const std::string& path) {
  return build_simulation_config(parse_config_file(path));
}

MonodKinetics SimulationConfig::make_kinetics() const {
  return MonodKinetics(kinetics,
                       admissible_box(model, bulk, std::max(numerics.t_end,
                                                            contraction_T1)));
}

HBox SimulationConfig::make_hbox() const {
  if (hbox_override) return *hbox_override;
  return default_hbox(model, bulk, contraction_T1 > 0 ? contraction_T1 : numerics.t_end);
}

void override_numeric(ConfigTable& table, const std::string& dotted_key, double value) {
  std::size_t dot = dotted_key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == dotted_key.size())
    throw ConfigError("sweep parameter must look like section.key: " + dotted_key);
  std::string sec = dotted_key.substr(0, dot);
  std::string key = dotted_key.substr(dot + 1);
  table[sec][key] = ConfigValue{value};
}

}  // namespace granule
