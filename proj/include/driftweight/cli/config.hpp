#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftweight/data/schedule.hpp"
#include "driftweight/omega/estimator.hpp"
#include "driftweight/omega/propensity.hpp"
#include "driftweight/rl/agent.hpp"
#include "driftweight/train/benchmark.hpp"

namespace dw::cli {

/// Every knob of every subcommand. Text form is INI-like:
///
///   [section]
///   key = value      ; or # comments
///
/// Sections: run, schedule, estimator, model, propensity, benchmark, rl, validate.
/// Unknown sections or keys are rejected. See docs/config.md for the full schema.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  int jobs = 1;

  data::DriftSchedule schedule;
  omega::EstimatorConfig estimator;
  bool estimator_uses_label = true;
  bool estimator_warm_start = true;
  int estimator_refresh_epochs = 10;
  train::ModelConfig model;
  omega::PropensityConfig propensity;

  std::vector<train::ProtocolSpec> protocols;
  int first_step = 1;
  int last_step = -1;
  int test_size = -1;
  std::string stream_dir;

  std::string rl_goal_path = "perimeter";  // perimeter | fixed
  rl::RLConfig rl;

  std::string snapshot;  // validate: estimator snapshot path
  std::string validate_stream_dir;

  ExperimentConfig();

  /// Cross-field checks; throws ValidationError.
  void validate() const;

  train::BenchmarkConfig benchmark() const;
  rl::RLConfig rl_config() const;
};

/// Throws ValidationError on unknown keys or malformed values, IoError on unreadable text.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(write_config(c)) reproduces c exactly.
void write_config(std::ostream& out, const ExperimentConfig& config);
std::string config_text(const ExperimentConfig& config);

/// FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace dw::cli
