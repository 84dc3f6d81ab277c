#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chemopulse/chemopulse.h"

namespace cptool {

// Exit-code categories: 1 config, 2 numerical, 3 I/O.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CpConfigDeleter {
  void operator()(cp_config* c) const { cp_config_destroy(c); }
};
using CpConfigPtr = std::unique_ptr<cp_config, CpConfigDeleter>;

struct SweepAxis {
  std::string parameter;
  std::vector<double> values;
};

// Full run description: the solver configuration handle plus the
// tool-side orchestration keys.
struct RunConfig {
  CpConfigPtr core;

  std::string mode = "macro";  // macro kinetic speed stability cluster fit sweep
  std::string output_dir = "out";
  bool write_diagnostics = true;
  double fit_window = 1.0 / 3.0;
  std::string fit_input_dir;
  int stability_kmax = 100;
  std::string sweep_mode = "macro";
  std::vector<SweepAxis> axes;
  int workers = 0;  // 0: hardware concurrency
  unsigned long long seed = 0;  // reserved; every mode is deterministic

  RunConfig();
  RunConfig(const RunConfig& other);
  RunConfig& operator=(const RunConfig& other);
  RunConfig(RunConfig&&) = default;
  RunConfig& operator=(RunConfig&&) = default;
};

// Bundled parameter sets:
//   fig3     stiff response, abundant nutrient  (delta 1e-3, N0 10)
//   fig4     smooth response, abundant nutrient (delta 1e-1, N0 10)
//   fig5     stiff response, limited nutrient   (delta 1e-3, N0 1)
//   cluster  no consumption, bivaluated response, centered bump
RunConfig preset_config(const std::string& name);

// Applies one key; origin is prepended to error messages.
void apply_key(RunConfig& cfg, const std::string& key,
               const std::string& value, const std::string& origin);

// `key=value` as passed on the command line.
void apply_override(RunConfig& cfg, const std::string& keyval);

// Parses the `key = value` file at path; unknown keys and malformed lines
// are hard errors, all reported with their line and column.
void apply_config_file(RunConfig& cfg, const std::string& path);

// Cross-key checks (axes have values, mode is known, ...) plus the solver
// configuration invariants. Throws ConfigError listing every problem.
void validate_run_config(const RunConfig& cfg);

// Canonical text form; parsing it back yields an identical configuration.
std::string serialize(const RunConfig& cfg);

std::string core_get(const cp_config* core, const std::string& key);
double core_get_number(const cp_config* core, const std::string& key);

}  // namespace cptool
