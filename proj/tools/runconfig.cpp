#include "runconfig.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace cptool {

namespace {

// Shortest decimal form that parses back to the same binary64 value.
std::string fmt_number(double v) {
  char buf[64];
  for (int precision : {15, 16, 17}) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
  const char* s = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *trim(end).c_str() != '\0')
    throw ConfigError("value for '" + key + "' is not a number: '" + value +
                      "'");
  return v;
}

long parse_long(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (std::abs(v - std::round(v)) > 1e-9)
    throw ConfigError("value for '" + key + "' must be an integer");
  return std::lround(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("value for '" + key + "' must be true or false");
}

std::vector<double> parse_number_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty())
      throw ConfigError("empty entry in value list for '" + key + "'");
    out.push_back(parse_double(key, t));
  }
  if (out.empty()) throw ConfigError("value list for '" + key + "' is empty");
  return out;
}

std::vector<std::string> parse_name_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

const std::set<std::string>& known_modes() {
  static const std::set<std::string> modes = {
      "macro", "kinetic", "speed", "stability", "cluster", "fit", "sweep"};
  return modes;
}

bool is_core_key(const std::string& key) {
  for (std::size_t i = 0; i < cp_config_key_count(); ++i)
    if (key == cp_config_key_name(i)) return true;
  return false;
}

SweepAxis* find_axis(RunConfig& cfg, const std::string& name) {
  for (auto& a : cfg.axes)
    if (a.parameter == name) return &a;
  return nullptr;
}

}  // namespace

RunConfig::RunConfig() {
  cp_config* raw = nullptr;
  if (cp_config_create(&raw) != CP_OK)
    throw RunError(std::string("failed to create configuration: ") +
                   cp_last_error());
  core.reset(raw);
}

RunConfig::RunConfig(const RunConfig& other) { *this = other; }

RunConfig& RunConfig::operator=(const RunConfig& other) {
  if (this == &other) return *this;
  cp_config* raw = nullptr;
  if (cp_config_clone(other.core.get(), &raw) != CP_OK)
    throw RunError(std::string("failed to clone configuration: ") +
                   cp_last_error());
  core.reset(raw);
  mode = other.mode;
  output_dir = other.output_dir;
  write_diagnostics = other.write_diagnostics;
  fit_window = other.fit_window;
  fit_input_dir = other.fit_input_dir;
  stability_kmax = other.stability_kmax;
  sweep_mode = other.sweep_mode;
  axes = other.axes;
  workers = other.workers;
  seed = other.seed;
  return *this;
}

std::string core_get(const cp_config* core, const std::string& key) {
  char buf[128];
  if (cp_config_get(core, key.c_str(), buf, sizeof(buf)) != CP_OK)
    throw ConfigError(std::string("cannot read key '") + key +
                      "': " + cp_last_error());
  return buf;
}

double core_get_number(const cp_config* core, const std::string& key) {
  double v = 0.0;
  if (cp_config_get_number(core, key.c_str(), &v) != CP_OK)
    throw ConfigError(std::string("cannot read key '") + key +
                      "': " + cp_last_error());
  return v;
}

void apply_key(RunConfig& cfg, const std::string& key,
               const std::string& value, const std::string& origin) {
  try {
    if (key == "mode") {
      if (!known_modes().count(value))
        throw ConfigError("unknown mode '" + value + "'");
      cfg.mode = value;
    } else if (key == "output.dir") {
      cfg.output_dir = value;
    } else if (key == "output.diagnostics") {
      cfg.write_diagnostics = parse_bool(key, value);
    } else if (key == "fit.window_fraction") {
      cfg.fit_window = parse_double(key, value);
      if (!(cfg.fit_window > 0.0 && cfg.fit_window <= 1.0))
        throw ConfigError("fit.window_fraction out of range (0,1]");
    } else if (key == "fit.input_dir") {
      cfg.fit_input_dir = value;
    } else if (key == "stability.k_max") {
      cfg.stability_kmax = static_cast<int>(parse_long(key, value));
      if (cfg.stability_kmax < 1)
        throw ConfigError("stability.k_max must be at least 1");
    } else if (key == "sweep.mode") {
      if (value != "macro" && value != "kinetic" && value != "speed")
        throw ConfigError("sweep.mode must be macro, kinetic or speed");
      cfg.sweep_mode = value;
    } else if (key == "sweep.axes") {
      cfg.axes.clear();
      for (const auto& name : parse_name_list(value)) {
        if (!is_core_key(name))
          throw ConfigError("sweep axis '" + name +
                            "' is not a configuration key");
        if (find_axis(cfg, name))
          throw ConfigError("sweep axis '" + name + "' listed twice");
        cfg.axes.push_back({name, {}});
      }
    } else if (key.rfind("sweep.values.", 0) == 0) {
      const std::string param = key.substr(std::strlen("sweep.values."));
      SweepAxis* axis = find_axis(cfg, param);
      if (axis == nullptr)
        throw ConfigError("values given for undeclared sweep axis '" + param +
                          "' (declare it in sweep.axes first)");
      axis->values = parse_number_list(key, value);
    } else if (key == "workers") {
      cfg.workers = static_cast<int>(parse_long(key, value));
      if (cfg.workers < 0) throw ConfigError("workers must be >= 0");
    } else if (key == "seed") {
      cfg.seed = static_cast<unsigned long long>(parse_long(key, value));
    } else {
      if (cp_config_set(cfg.core.get(), key.c_str(), value.c_str()) != CP_OK)
        throw ConfigError(cp_last_error());
    }
  } catch (const ConfigError& e) {
    if (origin.empty()) throw;
    throw ConfigError(origin + ": " + e.what());
  }
}

void apply_override(RunConfig& cfg, const std::string& keyval) {
  const std::size_t eq = keyval.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + keyval + "' is not of the form key=value");
  const std::string key = trim(keyval.substr(0, eq));
  const std::string value = trim(keyval.substr(eq + 1));
  if (key.empty()) throw ConfigError("override '" + keyval + "' has no key");
  apply_key(cfg, key, value, "override");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");

  std::vector<std::string> errors;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(path + ":" + std::to_string(lineno) +
                       ":1: expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::size_t col = line.find_first_not_of(" \t") + 1;
    const std::string origin =
        path + ":" + std::to_string(lineno) + ":" + std::to_string(col);
    if (key.empty()) {
      errors.push_back(origin + ": missing key before '='");
      continue;
    }
    if (value.empty()) {
      errors.push_back(origin + ": missing value for '" + key + "'");
      continue;
    }
    try {
      apply_key(cfg, key, value, origin);
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) {
    std::ostringstream os;
    for (std::size_t i = 0; i < errors.size(); ++i)
      os << (i ? "\n" : "") << errors[i];
    throw ConfigError(os.str());
  }
}

void validate_run_config(const RunConfig& cfg) {
  std::vector<std::string> problems;
  if (!known_modes().count(cfg.mode))
    problems.push_back("unknown mode '" + cfg.mode + "'");
  if (cfg.mode == "sweep" && cfg.axes.empty())
    problems.push_back("sweep mode needs at least one axis");
  for (const auto& a : cfg.axes)
    if (a.values.empty())
      problems.push_back("sweep axis '" + a.parameter + "' has no values");
  if (cfg.mode == "fit" && cfg.fit_input_dir.empty())
    problems.push_back("fit mode needs fit.input_dir");
  if (cp_config_validate(cfg.core.get()) != CP_OK)
    problems.push_back(cp_last_error());
  if (!problems.empty()) {
    std::ostringstream os;
    for (std::size_t i = 0; i < problems.size(); ++i)
      os << (i ? "; " : "") << problems[i];
    throw ConfigError(os.str());
  }
}

RunConfig preset_config(const std::string& name) {
  RunConfig cfg;  // defaults are the fig3 regime already
  auto set = [&cfg](const char* key, const std::string& value) {
    if (cp_config_set(cfg.core.get(), key, value.c_str()) != CP_OK)
      throw RunError(std::string("preset key failed: ") + cp_last_error());
  };
  if (name == "fig3") {
    set("response.delta", "1e-3");
    set("params.N0", "10");
  } else if (name == "fig4") {
    set("response.delta", "1e-1");
    set("params.N0", "10");
  } else if (name == "fig5") {
    set("response.delta", "1e-3");
    set("params.N0", "1");
  } else if (name == "cluster") {
    set("response.shape", "bivaluated");
    set("response.phi0", "1");
    set("params.gamma", "0");
    set("params.N0", "1");
    set("grid.L", "40");
    set("grid.n_cells", "800");
    set("init.center", fmt_number(20.0));
    set("solver.dt", "0.005");
    set("solver.t_end", "80");
    set("solver.snapshot_every", "400");
  } else {
    throw ConfigError("unknown preset '" + name +
                      "' (available: fig3, fig4, fig5, cluster)");
  }
  return cfg;
}

std::string serialize(const RunConfig& cfg) {
  std::ostringstream os;
  os << "mode = " << cfg.mode << "\n";
  os << "output.dir = " << cfg.output_dir << "\n";
  os << "output.diagnostics = " << (cfg.write_diagnostics ? "true" : "false")
     << "\n";
  os << "fit.window_fraction = " << fmt_number(cfg.fit_window) << "\n";
  if (!cfg.fit_input_dir.empty())
    os << "fit.input_dir = " << cfg.fit_input_dir << "\n";
  os << "stability.k_max = " << cfg.stability_kmax << "\n";
  os << "workers = " << cfg.workers << "\n";
  os << "seed = " << cfg.seed << "\n";
  if (!cfg.axes.empty()) {
    os << "sweep.mode = " << cfg.sweep_mode << "\n";
    os << "sweep.axes = ";
    for (std::size_t i = 0; i < cfg.axes.size(); ++i)
      os << (i ? "; " : "") << cfg.axes[i].parameter;
    os << "\n";
    for (const auto& a : cfg.axes) {
      os << "sweep.values." << a.parameter << " = ";
      for (std::size_t i = 0; i < a.values.size(); ++i)
        os << (i ? ", " : "") << fmt_number(a.values[i]);
      os << "\n";
    }
  }
  for (std::size_t i = 0; i < cp_config_key_count(); ++i) {
    const char* key = cp_config_key_name(i);
    os << key << " = " << core_get(cfg.core.get(), key) << "\n";
  }
  return os.str();
}

}  // namespace cptool
