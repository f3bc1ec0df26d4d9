#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "driftweight/random.hpp"

namespace dw::data {

/// One observation from a drifting stream.
struct TimedSample {
  std::vector<double> x;
  std::optional<int> y;
  int t = 0;

  bool operator==(const TimedSample&) const = default;
};

using Stream = std::vector<TimedSample>;

enum class DriftKind { gaussian_walk, label_shift };

/// 1-D mean walk: mu_t = mu_{t-1} + d/10, with d negated after every flip_period steps.
struct GaussianWalkParams {
  double mu0 = 0.5;
  double d = 1.0;
  int flip_period = 50;
};

/// Continuous label shift over C classes: v_t interpolates between consecutive base
/// distributions q^i and q^{i+1} over steps_per_pair steps, wrapping after class C-1.
/// Features are class-conditional Gaussians N(mean_c, sigma^2 I) with fixed means.
struct LabelShiftParams {
  int classes = 10;
  int steps_per_pair = 6;
  double peak = 0.82;  // mass of q^i on class i; the rest is spread evenly
  int feature_dim = 16;
  double class_separation = 4.2;  // pairwise distance between class means
  double sigma = 1.0;
};

struct DriftSchedule {
  DriftKind kind = DriftKind::gaussian_walk;
  int horizon = 160;
  int samples_per_step = 200;
  GaussianWalkParams gaussian;
  LabelShiftParams label;

  /// Throws ValidationError on non-positive horizon, sample count, periods, etc.
  void validate() const;

  int feature_dim() const;
  int num_classes() const;
};

/// mu_t of a gaussian_walk schedule (0 <= t <= horizon).
double gaussian_mean(const DriftSchedule& schedule, int t);

/// Base distribution q^i (index taken modulo C).
std::vector<double> base_distribution(const LabelShiftParams& params, int i);

/// Convex interpolation (1 - offset/steps) q_a + (offset/steps) q_b.
std::vector<double> interpolate(std::span<const double> q_a, std::span<const double> q_b,
                                int offset, int steps);

/// Class-probability vector v_t of a label_shift schedule.
std::vector<double> label_shift_probs(const DriftSchedule& schedule, int t);

/// Fixed class means used by label_shift features, [classes][feature_dim].
std::vector<std::vector<double>> class_means(const LabelShiftParams& params);

/// N samples from p_t; requires t < horizon. Throws RangeError otherwise.
Stream gaussian_step(const DriftSchedule& schedule, int t, Rng& rng);
Stream label_shift_step(const DriftSchedule& schedule, int t, Rng& rng);

/// Draws n samples (default: samples_per_step) from p_{t_next}; t_next may equal horizon,
/// the step after the last training step.
Stream test_set_at(const DriftSchedule& schedule, int t_next, Rng& rng, int n = -1);

/// Training draws for step t, from the rng stream derive_seed(seed, "train", t).
Stream generate_step(const DriftSchedule& schedule, int t, std::uint64_t seed);

/// All steps 0..horizon-1 concatenated in time order.
Stream generate_stream(const DriftSchedule& schedule, std::uint64_t seed);

/// Test draw at t_next from the rng stream derive_seed(seed, "test", t_next).
Stream generate_test(const DriftSchedule& schedule, int t_next, std::uint64_t seed, int n = -1);

}  // namespace dw::data
