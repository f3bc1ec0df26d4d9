#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "driftweight/data/schedule.hpp"
#include "driftweight/omega/estimator.hpp"
#include "driftweight/train/classifier.hpp"

namespace dw::train {

enum class Protocol { everything, recent, finetune, omega_weighted, beta_weighted };

/// A protocol plus, for omega_weighted, which estimator variant supplies the weights.
struct ProtocolSpec {
  Protocol kind = Protocol::everything;
  omega::Method method = omega::Method::method1;

  /// "omega_weighted" for method1, "omega_weighted_m2" for method2.
  std::string name() const;
  bool operator==(const ProtocolSpec&) const = default;
};

/// Accepts everything, recent, finetune, omega_weighted (= _m1), omega_weighted_m2,
/// beta_weighted. Throws ValidationError otherwise.
ProtocolSpec parse_protocol(std::string_view name);

/// Everything a single per-step fit needs. Initialization draws from (seed, "model", t)
/// and minibatch order from (seed, "shuffle", t), so every protocol at step t starts from
/// the same parameters.
struct StepContext {
  int t = 0;
  int classes = 2;
  ModelConfig model;
  std::uint64_t seed = 0;
  StepObserver observer;
};

/// Fresh model on every sample with t_i <= t.
Classifier train_everything(const Dataset& history, const StepContext& ctx);

/// Fresh model on the samples with t_i == t only.
Classifier train_recent(const Dataset& history, const StepContext& ctx);

/// Stage 1: fresh model on t_i < t. Stage 2: warm-started from stage 1 with new Adam
/// moments, model.finetune_epochs epochs on t_i == t.
Classifier train_finetune(const Dataset& history, const StepContext& ctx);

/// Fresh model on t_i <= t with per-sample loss weights (one per history row).
Classifier train_weighted(const Dataset& history, std::span<const double> weights,
                          const StepContext& ctx);

/// Accuracy on a fresh draw from p_{t+1} (the test rng stream for seed). Throws
/// RangeError when t + 1 exceeds the horizon.
double evaluate_next_step(const Classifier& model, const data::DriftSchedule& schedule, int t,
                          std::uint64_t seed, int test_size = -1);

}  // namespace dw::train
