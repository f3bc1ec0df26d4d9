// driftweight: experiment runner. See README.md for the subcommands.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "driftweight/cli/commands.hpp"
#include "driftweight/cli/config.hpp"
#include "driftweight/errors.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  dw::cli::RunOptions run;
};

void add_common(CLI::App* cmd, Flags& f, bool with_config = true) {
  if (with_config) {
    cmd->add_option("--config", f.config, "INI config file (defaults apply when omitted)");
    cmd->add_option("--seed", f.seed, "Run a single seed instead of the configured list");
    cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--dry-run", f.run.dry_run, "Print the plan and write nothing");
    cmd->add_flag("--force", f.run.force, "Overwrite results of a different config");
  }
  cmd->add_option("--out", f.run.out, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-varying importance weights for drifting data streams"};
  app.require_subcommand(1);
  Flags f;

  auto* gen = app.add_subcommand("gen", "Write a drifting stream as per-step CSV files");
  auto* train = app.add_subcommand("train-omega", "Fit the weight estimator and save a snapshot");
  auto* bench = app.add_subcommand("benchmark", "Compare training protocols with next-step evaluation");
  auto* rl = app.add_subcommand("rl", "Weighted vs plain TD on the drifting gridworld");
  auto* val = app.add_subcommand("validate", "MMD between current and (weighted) past data");
  auto* plot = app.add_subcommand("plot", "Redraw SVG charts from CSV results in --out");
  for (auto* cmd : {gen, train, bench, rl, val}) add_common(cmd, f);
  add_common(plot, f, false);
  rl->add_flag("--baseline-only", f.run.baseline_only, "Skip the weighted variant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (plot->parsed()) {
      dw::cli::cmd_plot(f.run, std::cout);
      return 0;
    }
    auto config = f.config.empty() ? dw::cli::ExperimentConfig{} : dw::cli::load_config(f.config);
    dw::cli::apply_overrides(config, f.seed, f.jobs);
    if (gen->parsed()) dw::cli::cmd_gen(config, f.run, std::cout);
    if (train->parsed()) dw::cli::cmd_train_omega(config, f.run, std::cout);
    if (bench->parsed()) dw::cli::cmd_benchmark(config, f.run, std::cout);
    if (rl->parsed()) dw::cli::cmd_rl(config, f.run, std::cout);
    if (val->parsed()) dw::cli::cmd_validate(config, f.run, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dw::cli::exit_code_for(e);
  }
  return 0;
}
