#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "runconfig.hpp"

namespace cptool {

using Summary = std::vector<std::pair<std::string, std::string>>;

// Dispatches on cfg.mode, writes the run artifacts under cfg.output_dir
// and returns the summary that was written to summary.txt. Throws
// ConfigError / RunError / IoError on failure; sweep points fail
// individually without aborting the sweep.
Summary execute(const RunConfig& cfg, std::ostream& log);

// Helpers shared with the tests.
std::string format_full(double v);  // 17 significant digits
void write_summary_file(const std::string& path, const Summary& summary);
Summary read_summary_file(const std::string& path);
const std::string* summary_find(const Summary& s, const std::string& key);

}  // namespace cptool
