// chemopulse command line: drives the solver library through its C API.
//
// Exit codes: 0 ok, 1 configuration error, 2 numerical failure, 3 I/O error.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "runconfig.hpp"
#include "runner.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::vector<std::string> overrides;
  int workers = -1;
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "key = value configuration file");
  cmd->add_option("--preset", args.preset,
                  "bundled parameter set: fig3, fig4, fig5, cluster");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--override", args.overrides,
                  "key=value applied after the config file (repeatable)");
  cmd->add_option("--workers", args.workers, "sweep worker pool size");
  cmd->add_option("--seed", args.seed,
                  "reserved; all modes are deterministic");
}

cptool::RunConfig assemble(const CommonArgs& args, const std::string& mode) {
  cptool::RunConfig cfg =
      args.preset.empty() ? cptool::RunConfig() : cptool::preset_config(args.preset);
  if (!args.config_path.empty())
    cptool::apply_config_file(cfg, args.config_path);
  for (const auto& kv : args.overrides) cptool::apply_override(cfg, kv);
  cfg.mode = mode;
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (args.workers >= 0) cfg.workers = args.workers;
  if (args.seed >= 0) cfg.seed = static_cast<unsigned long long>(args.seed);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chemopulse: chemotactic traveling-pulse laboratory"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* mode;
    const char* help;
  };
  const Sub subs[] = {
      {"simulate", "macro", "macroscopic drift-diffusion-reaction run"},
      {"kinetic", "kinetic", "velocity-resolved kinetic run"},
      {"speed", "speed", "analytic pulse speed and profile"},
      {"stability", "stability", "dispersion relation and critical mass"},
      {"cluster", "cluster", "analytic zero-speed aggregate profile"},
      {"fit", "fit", "re-fit archived snapshots (fit.input_dir)"},
      {"sweep", "sweep", "cross-product parameter sweep"},
  };

  CommonArgs args;
  std::string mode;
  for (const Sub& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, args);
    cmd->callback([&mode, &s]() { mode = s.mode; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    cptool::RunConfig cfg = assemble(args, mode);
    const cptool::Summary summary = cptool::execute(cfg, std::cout);
    for (const auto& [key, value] : summary)
      if (key.rfind("run.", 0) == 0 || key.rfind("fit.", 0) == 0 ||
          key.rfind("analytic.", 0) == 0 || key.rfind("agreement.", 0) == 0 ||
          key.rfind("stability.", 0) == 0 || key.rfind("cluster.", 0) == 0)
        std::cout << "  " << key << " = " << value << "\n";
    return 0;
  } catch (const cptool::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const cptool::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const cptool::RunError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
