#include "driftweight/omega/inputs.hpp"

#include <cmath>
#include <numbers>

#include "driftweight/errors.hpp"

namespace dw::omega {

TimedInputs make_inputs(std::span<const data::TimedSample> samples, const InputSpec& spec) {
  if (samples.empty()) return {};
  const auto feature_dim = static_cast<int>(samples.front().x.size());
  TimedInputs inputs;
  inputs.x = nn::Matrix::Zero(static_cast<Eigen::Index>(samples.size()), spec.dim(feature_dim));
  inputs.t.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (static_cast<int>(s.x.size()) != feature_dim) {
      throw ShapeError("make_inputs: feature dimension is not constant");
    }
    const auto row = static_cast<Eigen::Index>(i);
    for (int k = 0; k < feature_dim; ++k) inputs.x(row, k) = s.x[k];
    if (spec.include_label) {
      if (!s.y || *s.y < 0 || *s.y >= spec.num_classes) {
        throw InputError("make_inputs: sample lacks a valid label");
      }
      inputs.x(row, feature_dim + *s.y) = 1.0;
    }
    inputs.t.push_back(s.t);
  }
  return inputs;
}

TimeEncoding::TimeEncoding(int horizon, int frequencies)
    : horizon_(horizon), frequencies_(frequencies) {
  if (horizon <= 0) throw ValidationError("TimeEncoding: horizon must be positive");
  if (frequencies < 0) throw ValidationError("TimeEncoding: frequencies must be >= 0");
  table_.resize(static_cast<std::size_t>(horizon + 1) * dim());
  for (int t = 0; t <= horizon; ++t) {
    encode(t, std::span<double>(table_.data() + static_cast<std::size_t>(t) * dim(), dim()));
  }
}

std::span<const double> TimeEncoding::row(int t) const {
  if (t < 0 || t > horizon_) throw RangeError("TimeEncoding: time outside horizon");
  return {table_.data() + static_cast<std::size_t>(t) * dim(), static_cast<std::size_t>(dim())};
}

void TimeEncoding::encode(int t, std::span<double> out) const {
  if (static_cast<int>(out.size()) != dim()) throw ShapeError("TimeEncoding: wrong output size");
  const double u = static_cast<double>(t) / horizon_;
  out[0] = u;
  double freq = 2.0 * std::numbers::pi;
  for (int k = 0; k < frequencies_; ++k) {
    out[1 + 2 * k] = std::sin(freq * u);
    out[2 + 2 * k] = std::cos(freq * u);
    freq *= 2.0;
  }
}

}  // namespace dw::omega
