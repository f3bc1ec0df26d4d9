#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "driftweight/cli/config.hpp"

namespace dw::cli {

struct RunOptions {
  std::filesystem::path out = "out";
  bool force = false;
  bool dry_run = false;
  bool baseline_only = false;
};

/// --seed replaces both the single seed and the seed list; --jobs replaces run.jobs.
void apply_overrides(ExperimentConfig& config, std::optional<std::uint64_t> seed, std::optional<int> jobs);

// Every command validates the config before touching the output directory, then claims
// the directory through its manifest. Progress lines go to `log`.

/// step_0000.csv ... one file per step of the schedule, drawn with run.seed.
void cmd_gen(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);
/// Fits the estimator on the stream (benchmark.stream_dir or generated) and saves omega.snapshot.
void cmd_train_omega(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);
/// runs_<protocol>.csv, summary.csv and accuracy.svg. When benchmark.stream_dir is set,
/// seed k reads its stream from <stream_dir>/seed_<k>/.
void cmd_benchmark(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);
/// baseline/seed_<k>.csv, weighted/seed_<k>.csv, summary.csv and returns.svg.
void cmd_rl(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);
/// mmd.csv and mmd.svg from validate.snapshot and a stream.
void cmd_validate(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);
/// Re-renders the SVG charts from whatever CSV results are in the output directory.
void cmd_plot(const RunOptions& options, std::ostream& log);

/// 1 for validation and other usage errors, 2 for I/O errors.
int exit_code_for(const std::exception& error);

}  // namespace dw::cli
