#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "deltaclip/config.hpp"
#include "deltaclip/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "experiment config (JSON, version 1)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory (overrides config and DELTACLIP_OUT)");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&args](std::uint64_t s) { args.seed = s; }, "override the config seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deltaclip: step-size rules, clipped descent runs and bound checks"};
  app.require_subcommand(1);

  CommonArgs run_args, grid_args, verify_args;
  int jobs = 1;

  CLI::App* run = app.add_subcommand("run", "execute one configured run, write trace and report");
  add_common(run, run_args);

  CLI::App* grid = app.add_subcommand("grid", "run the Cartesian hyperparameter grid");
  add_common(grid, grid_args);
  grid->add_option("--jobs", jobs, "concurrent grid cells")->check(CLI::PositiveNumber);

  CLI::App* verify =
      app.add_subcommand("verify", "run the invariant checks for a config, exit 0 iff all pass");
  add_common(verify, verify_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage errors share the config-error exit code
  }

  try {
    if (run->parsed()) return deltaclip::cmd_run(run_args.config_path, run_args.out_dir, run_args.seed);
    if (grid->parsed())
      return deltaclip::cmd_grid(grid_args.config_path, grid_args.out_dir, grid_args.seed, jobs);
    if (verify->parsed())
      return deltaclip::cmd_verify(verify_args.config_path, verify_args.out_dir, verify_args.seed);
  } catch (const deltaclip::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
