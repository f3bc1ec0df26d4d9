#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "driftweight/data/schedule.hpp"
#include "driftweight/nn/dense_net.hpp"
#include "driftweight/omega/estimator.hpp"
#include "driftweight/omega/inputs.hpp"

namespace dw::validate {

using nn::Matrix;

/// Unbiased squared MMD with the Gaussian kernel exp(-|u - v|^2 / (2 h^2)).
/// Samples are rows. Throws InputError when either side has fewer than two rows,
/// ShapeError on a dimension mismatch, InputError on a non-positive bandwidth.
double mmd2(const Matrix& x, const Matrix& y, double bandwidth);

/// As mmd2, with the Y-side expectations replaced by w-weighted means. The Y-Y term is
/// sum_{i != j} w_i w_j k / ((sum w)^2 - sum w^2), which equals the unbiased form for
/// constant weights; when only one weight is nonzero it falls back to the biased
/// one-point term k(y, y) = 1. Throws InputError on negative or all-zero weights.
double weighted_mmd2(const Matrix& x, const Matrix& y, std::span<const double> w,
                     double bandwidth);

/// Median pairwise Euclidean distance over at most max_points rows (evenly strided when
/// there are more), ignoring zero distances; 1.0 when every point coincides.
double median_bandwidth(const Matrix& points, std::size_t max_points = 2000);

struct MMDRecord {
  int t = 0;
  double mmd_unweighted = 0.0;  // raw unbiased estimate, may be slightly negative
  double mmd_weighted = 0.0;
  double bandwidth = 1.0;
  std::size_t n_current = 0;
  std::size_t n_past = 0;

  double unweighted_truncated() const { return mmd_unweighted > 0.0 ? mmd_unweighted : 0.0; }
  double weighted_truncated() const { return mmd_weighted > 0.0 ? mmd_weighted : 0.0; }
};

struct MMDReport {
  std::vector<MMDRecord> records;
};

struct Fig3Options {
  /// Fixed bandwidth; by default the median heuristic over the whole stream's features.
  std::optional<double> bandwidth;
  /// How the stream is turned into estimator inputs (must match how est was trained).
  omega::InputSpec inputs;
};

/// For every t >= 1 present in the stream: MMD between the features at t and all features
/// with t_i < t, unweighted and weighted by omega(x_i, t, t_i). Kernel distances use the
/// raw features; the estimator sees the inputs built from `options.inputs`.
/// Throws InputError when the stream spans fewer than two steps.
MMDReport fig3_protocol(const data::Stream& stream, const omega::OmegaEstimator& est,
                        const Fig3Options& options = {});

// t,mmd_unweighted,mmd_weighted,bandwidth,n_current,n_past
void write_report_csv(std::ostream& out, const MMDReport& report);

}  // namespace dw::validate
