#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "ihsim/config.hpp"
#include "ihsim/simulation.hpp"

// ihsim run <config> [--mode ...] [--duration S] [--out PATH] [--quiet]
// ihsim preset --list
//
// Exit codes: 0 success, 1 configuration error, 2 numeric abort.

namespace {

int run_command(const std::string& config_path, const std::string& mode_flag,
                double duration_flag, const std::string& out_flag, bool quiet) {
  ihsim::SimConfig cfg = ihsim::load_config(config_path);
  if (!mode_flag.empty()) {
    if (mode_flag == "open_loop") cfg.mode = ihsim::SimMode::open_loop;
    else if (mode_flag == "closed_loop") cfg.mode = ihsim::SimMode::closed_loop;
    else throw ihsim::ConfigError("--mode expects open_loop or closed_loop");
  }
  if (duration_flag > 0.0) cfg.duration = duration_flag;
  if (!out_flag.empty()) cfg.output_path = out_flag;
  cfg.validate();

  const ihsim::RunResult result = ihsim::run_simulation(cfg);
  if (!quiet) {
    ihsim::print_summary(stdout, result.summary);
    if (!cfg.output_path.empty()) {
      std::fprintf(stdout, "trace=%s\n", cfg.output_path.c_str());
      std::fprintf(stdout, "cycles_csv=%s\n",
                   ihsim::cycles_path_for(cfg.output_path).c_str());
    }
  }
  return 0;
}

int preset_command(bool list) {
  if (list) {
    for (const auto& [name, description] : ihsim::preset_list())
      std::fprintf(stdout, "%-14s %s\n", name.c_str(), description.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Induction-heating power-supply simulator: SPWM full bridge into"
               " a thermally drifting series resonant load, closed by fuzzy"
               " resonance-tracking and power-regulation loops."};
  app.require_subcommand(1);

  std::string config_path, mode_flag, out_flag;
  double duration_flag = 0.0;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "Run a scenario from a config file");
  run->add_option("config", config_path, "flat key=value config file")->required();
  run->add_option("--mode", mode_flag, "override sim.mode (open_loop|closed_loop)");
  run->add_option("--duration", duration_flag, "override sim.duration, seconds");
  run->add_option("--out", out_flag, "override sim.output_path");
  run->add_flag("--quiet", quiet, "suppress the summary printout");

  bool list_presets = false;
  CLI::App* preset = app.add_subcommand("preset", "Inspect built-in presets");
  preset->add_flag("--list", list_presets, "list preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed())
      return run_command(config_path, mode_flag, duration_flag, out_flag, quiet);
    return preset_command(list_presets);
  } catch (const ihsim::NumericError& e) {
    std::fprintf(stderr, "numeric abort: %s\n", e.what());
    return 2;
  } catch (const ihsim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
