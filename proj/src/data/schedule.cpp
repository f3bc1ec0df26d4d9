#include "driftweight/data/schedule.hpp"

#include <cmath>
#include <string>

#include "driftweight/errors.hpp"

namespace dw::data {

void DriftSchedule::validate() const {
  if (horizon <= 0) throw ValidationError("schedule horizon must be positive");
  if (samples_per_step <= 0) throw ValidationError("samples_per_step must be positive");
  if (kind == DriftKind::gaussian_walk) {
    if (gaussian.flip_period <= 0) throw ValidationError("flip_period must be positive");
    if (!std::isfinite(gaussian.mu0) || !std::isfinite(gaussian.d)) {
      throw ValidationError("gaussian walk parameters must be finite");
    }
  } else {
    if (label.classes < 2) throw ValidationError("label_shift needs at least two classes");
    if (label.steps_per_pair <= 0) throw ValidationError("steps_per_pair must be positive");
    if (!(label.peak > 0.0 && label.peak <= 1.0)) throw ValidationError("peak must be in (0,1]");
    if (label.feature_dim < label.classes) {
      throw ValidationError("feature_dim must be at least the number of classes");
    }
    if (!(label.sigma > 0.0)) throw ValidationError("sigma must be positive");
    if (!(label.class_separation >= 0.0)) throw ValidationError("class_separation must be >= 0");
  }
}

int DriftSchedule::feature_dim() const {
  return kind == DriftKind::gaussian_walk ? 1 : label.feature_dim;
}

int DriftSchedule::num_classes() const {
  return kind == DriftKind::gaussian_walk ? 2 : label.classes;
}

namespace {

void check_kind(const DriftSchedule& s, DriftKind expected, const char* op) {
  if (s.kind != expected) throw InputError(std::string(op) + ": wrong schedule kind");
}

void check_train_step(const DriftSchedule& s, int t) {
  if (t < 0 || t >= s.horizon) {
    throw RangeError("time " + std::to_string(t) + " outside horizon " + std::to_string(s.horizon));
  }
}

}  // namespace

double gaussian_mean(const DriftSchedule& schedule, int t) {
  check_kind(schedule, DriftKind::gaussian_walk, "gaussian_mean");
  if (t < 0 || t > schedule.horizon) throw RangeError("gaussian_mean: time out of range");
  // Net number of upward steps among s = 1..t, where step s moves in direction
  // (-1)^floor((s-1)/flip_period).
  const long period = schedule.gaussian.flip_period;
  const long full = t / period;
  const long rest = t % period;
  long net = (full % 2 == 0) ? 0 : period;
  net += (full % 2 == 0) ? rest : -rest;
  return schedule.gaussian.mu0 + static_cast<double>(net) * schedule.gaussian.d / 10.0;
}

std::vector<double> base_distribution(const LabelShiftParams& params, int i) {
  const int c = params.classes;
  const int idx = ((i % c) + c) % c;
  std::vector<double> q(c, (1.0 - params.peak) / (c - 1));
  q[idx] = params.peak;
  return q;
}

std::vector<double> interpolate(std::span<const double> q_a, std::span<const double> q_b,
                                int offset, int steps) {
  if (q_a.size() != q_b.size()) throw ShapeError("interpolate: length mismatch");
  if (steps <= 0 || offset < 0 || offset > steps) throw RangeError("interpolate: bad offset");
  const double lambda = static_cast<double>(offset) / steps;
  std::vector<double> v(q_a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = (1.0 - lambda) * q_a[k] + lambda * q_b[k];
  return v;
}

std::vector<double> label_shift_probs(const DriftSchedule& schedule, int t) {
  check_kind(schedule, DriftKind::label_shift, "label_shift_probs");
  if (t < 0) throw RangeError("label_shift_probs: negative time");
  const auto& p = schedule.label;
  const int pair = (t / p.steps_per_pair) % p.classes;
  const int offset = t % p.steps_per_pair;
  return interpolate(base_distribution(p, pair), base_distribution(p, pair + 1), offset,
                     p.steps_per_pair);
}

std::vector<std::vector<double>> class_means(const LabelShiftParams& params) {
  // Scaled simplex: sep/sqrt(2) along one axis per class gives pairwise distance sep.
  std::vector<std::vector<double>> means(params.classes,
                                         std::vector<double>(params.feature_dim, 0.0));
  const double scale = params.class_separation / std::sqrt(2.0);
  for (int c = 0; c < params.classes; ++c) means[c][c] = scale;
  return means;
}

namespace {

Stream draw_gaussian(const DriftSchedule& schedule, int t, int n, Rng& rng) {
  const double mu = gaussian_mean(schedule, t);
  std::normal_distribution<double> noise(mu, 1.0);
  Stream out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = noise(rng);
    out.push_back({{x}, x > mu ? 1 : 0, t});
  }
  return out;
}

Stream draw_label_shift(const DriftSchedule& schedule, int t, int n, Rng& rng) {
  const auto v = label_shift_probs(schedule, t);
  const auto means = class_means(schedule.label);
  std::discrete_distribution<int> label(v.begin(), v.end());
  std::normal_distribution<double> noise(0.0, schedule.label.sigma);
  Stream out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int y = label(rng);
    std::vector<double> x(means[y]);
    for (double& xi : x) xi += noise(rng);
    out.push_back({std::move(x), y, t});
  }
  return out;
}

Stream draw(const DriftSchedule& schedule, int t, int n, Rng& rng) {
  return schedule.kind == DriftKind::gaussian_walk ? draw_gaussian(schedule, t, n, rng)
                                                   : draw_label_shift(schedule, t, n, rng);
}

}  // namespace

Stream gaussian_step(const DriftSchedule& schedule, int t, Rng& rng) {
  check_kind(schedule, DriftKind::gaussian_walk, "gaussian_step");
  check_train_step(schedule, t);
  return draw_gaussian(schedule, t, schedule.samples_per_step, rng);
}

Stream label_shift_step(const DriftSchedule& schedule, int t, Rng& rng) {
  check_kind(schedule, DriftKind::label_shift, "label_shift_step");
  check_train_step(schedule, t);
  return draw_label_shift(schedule, t, schedule.samples_per_step, rng);
}

Stream test_set_at(const DriftSchedule& schedule, int t_next, Rng& rng, int n) {
  if (t_next < 0 || t_next > schedule.horizon) {
    throw RangeError("test time " + std::to_string(t_next) + " past horizon " +
                     std::to_string(schedule.horizon));
  }
  return draw(schedule, t_next, n < 0 ? schedule.samples_per_step : n, rng);
}

Stream generate_step(const DriftSchedule& schedule, int t, std::uint64_t seed) {
  auto rng = make_rng(seed, "train", t);
  return schedule.kind == DriftKind::gaussian_walk ? gaussian_step(schedule, t, rng)
                                                   : label_shift_step(schedule, t, rng);
}

Stream generate_stream(const DriftSchedule& schedule, std::uint64_t seed) {
  schedule.validate();
  Stream all;
  all.reserve(static_cast<std::size_t>(schedule.horizon) * schedule.samples_per_step);
  for (int t = 0; t < schedule.horizon; ++t) {
    auto step = generate_step(schedule, t, seed);
    std::move(step.begin(), step.end(), std::back_inserter(all));
  }
  return all;
}

Stream generate_test(const DriftSchedule& schedule, int t_next, std::uint64_t seed, int n) {
  auto rng = make_rng(seed, "test", t_next);
  return test_set_at(schedule, t_next, rng, n);
}

}  // namespace dw::data
