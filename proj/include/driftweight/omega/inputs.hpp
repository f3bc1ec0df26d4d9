#pragma once

#include <span>
#include <vector>

#include "driftweight/data/schedule.hpp"
#include "driftweight/nn/dense_net.hpp"

namespace dw::omega {

/// Estimator inputs: one row per sample plus its integer time stamp.
struct TimedInputs {
  nn::Matrix x;
  std::vector<int> t;

  std::size_t size() const { return t.size(); }
  int dim() const { return static_cast<int>(x.cols()); }
};

/// Which parts of a TimedSample the estimator sees. With include_label the label is
/// appended one-hot, so the estimator contrasts joint (x, y) distributions across time.
struct InputSpec {
  bool include_label = false;
  int num_classes = 0;

  int dim(int feature_dim) const { return feature_dim + (include_label ? num_classes : 0); }
};

/// Throws InputError when a label is required but missing or out of range.
TimedInputs make_inputs(std::span<const data::TimedSample> samples, const InputSpec& spec);

/// Sinusoidal encoding of an integer time: [t/H, sin(2^k 2pi t/H), cos(2^k 2pi t/H)]
/// for k = 0..frequencies-1.
class TimeEncoding {
 public:
  TimeEncoding() = default;
  TimeEncoding(int horizon, int frequencies);

  int horizon() const { return horizon_; }
  int frequencies() const { return frequencies_; }
  int dim() const { return 1 + 2 * frequencies_; }
  void encode(int t, std::span<double> out) const;
  /// Encoded row for 0 <= t <= horizon, precomputed.
  std::span<const double> row(int t) const;

 private:
  int horizon_ = 1;
  int frequencies_ = 4;
  std::vector<double> table_;
};

}  // namespace dw::omega
