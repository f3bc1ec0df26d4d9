#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftweight/data/schedule.hpp"
#include "driftweight/omega/estimator.hpp"
#include "driftweight/omega/propensity.hpp"
#include "driftweight/train/protocols.hpp"

namespace dw::train {

struct BenchmarkConfig {
  data::DriftSchedule schedule;
  ModelConfig model;
  omega::EstimatorConfig estimator;
  /// The estimator is carried across steps: each step continues training it on the
  /// enlarged history for this many epochs. Without warm start it is rebuilt every step
  /// and trained for estimator.epochs.
  bool estimator_warm_start = true;
  int estimator_refresh_epochs = 10;
  /// Feed the one-hot label to the estimator so it contrasts joint (x, y) distributions.
  bool estimator_uses_label = true;
  omega::PropensityConfig propensity;
  std::vector<ProtocolSpec> protocols;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  int first_step = 1;
  int last_step = -1;  // negative: horizon - 1
  int test_size = -1;  // negative: samples_per_step
  int jobs = 1;

  /// Throws ValidationError on an empty protocol/seed list or a bad step range.
  void validate() const;
  int resolved_last_step() const;
};

struct StepResult {
  std::string protocol;
  std::uint64_t seed = 0;
  int t = 0;
  double accuracy = 0.0;
  std::size_t n_train = 0;
  double wallclock_ms = 0.0;
};

struct SummaryRow {
  std::string protocol;
  int t = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  int seeds = 0;
};

/// Supplies the training stream for a seed; defaults to data::generate_stream.
using StreamSource = std::function<data::Stream(std::uint64_t seed)>;

/// Trains every protocol from scratch at each step in [first_step, last_step] and scores
/// it on p_{t+1}. Work items are (seed, protocol) pairs spread over `jobs` threads;
/// results come back sorted by (protocol order, seed, t) regardless of scheduling.
std::vector<StepResult> run_benchmark(const BenchmarkConfig& config, const StreamSource& source = {});

/// Mean and standard error over seeds for each (protocol, t).
std::vector<SummaryRow> summarize(const std::vector<StepResult>& runs);

/// Mean accuracy of one protocol over seeds and steps with t >= from_step.
double mean_accuracy(const std::vector<StepResult>& runs, const std::string& protocol,
                     int from_step = 0);

/// Mean over steps t >= from_step, one value per seed in ascending seed order.
std::vector<double> per_seed_accuracy(const std::vector<StepResult>& runs,
                                      const std::string& protocol, int from_step = 0);

// protocol,seed,t,accuracy,n_train,wallclock_ms
void write_runs_csv(std::ostream& out, const std::vector<StepResult>& runs);
// protocol,t,mean_accuracy,stderr,seeds
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace dw::train
