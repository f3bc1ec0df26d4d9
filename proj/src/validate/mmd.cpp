#include "driftweight/validate/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "driftweight/errors.hpp"
#include "driftweight/stats.hpp"
#include "driftweight/text.hpp"

namespace dw::validate {

namespace {

constexpr Eigen::Index kBlock = 256;

void check_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("MMD bandwidth must be positive");
}

/// sum_i sum_j wa_i wb_j k(a_i, b_j); with `same` set, a and b are the same set and the
/// diagonal is skipped. Empty weight spans mean all ones.
double kernel_sum(const Matrix& a, const Matrix& b, std::span<const double> wa,
                  std::span<const double> wb, double h, bool same) {
  const double scale = -1.0 / (2.0 * h * h);
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::VectorXd wbv = wb.empty() ? Eigen::VectorXd::Ones(b.rows())
                                   : Eigen::Map<const Eigen::VectorXd>(wb.data(), b.rows()).eval();
  double total = 0.0;
  for (Eigen::Index start = 0; start < a.rows(); start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, a.rows() - start);
    const auto block = a.middleRows(start, rows);
    const Eigen::VectorXd na = block.rowwise().squaredNorm();
    Matrix k = (-2.0 * block * b.transpose());
    k.colwise() += na;
    k.rowwise() += nb.transpose();
    k = (k.array().max(0.0) * scale).exp().matrix();
    if (same) {
      for (Eigen::Index i = 0; i < rows; ++i) k(i, start + i) = 0.0;
    }
    const Eigen::VectorXd row_sums = k * wbv;
    for (Eigen::Index i = 0; i < rows; ++i) {
      total += (wa.empty() ? 1.0 : wa[start + i]) * row_sums[i];
    }
  }
  return total;
}

bool canonical_first(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) return x.rows() < y.rows();
  return !std::lexicographical_compare(y.data(), y.data() + y.size(), x.data(), x.data() + x.size());
}

/// Cross-term sum computed in one fixed orientation so that swapping the arguments gives
/// bit-identical results.
double cross_sum(const Matrix& x, const Matrix& y, double h) {
  return canonical_first(x, y) ? kernel_sum(x, y, {}, {}, h, false)
                               : kernel_sum(y, x, {}, {}, h, false);
}

void check_pair(const Matrix& x, const Matrix& y) {
  if (x.rows() < 2 || y.rows() < 2) throw InputError("MMD needs at least two samples per side");
  if (x.cols() != y.cols()) throw ShapeError("MMD sample dimensions differ");
}

}  // namespace

double mmd2(const Matrix& x, const Matrix& y, double bandwidth) {
  check_pair(x, y);
  check_bandwidth(bandwidth);
  const double m = static_cast<double>(x.rows());
  const double n = static_cast<double>(y.rows());
  const double xx = kernel_sum(x, x, {}, {}, bandwidth, true) / (m * (m - 1.0));
  const double yy = kernel_sum(y, y, {}, {}, bandwidth, true) / (n * (n - 1.0));
  const double xy = cross_sum(x, y, bandwidth) / (m * n);
  return xx + yy - 2.0 * xy;
}

double weighted_mmd2(const Matrix& x, const Matrix& y, std::span<const double> w,
                     double bandwidth) {
  check_pair(x, y);
  check_bandwidth(bandwidth);
  if (static_cast<Eigen::Index>(w.size()) != y.rows()) throw ShapeError("one weight per Y sample");
  double sum = 0.0, sum_sq = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("MMD weights must be finite and >= 0");
    sum += v;
    sum_sq += v * v;
  }
  if (!(sum > 0.0)) throw InputError("MMD weights are all zero");

  const double m = static_cast<double>(x.rows());
  const double xx = kernel_sum(x, x, {}, {}, bandwidth, true) / (m * (m - 1.0));
  const double xy = kernel_sum(x, y, {}, w, bandwidth, false) / (m * sum);
  const double denom = sum * sum - sum_sq;
  double yy = 0.0;
  if (denom > 1e-12 * sum * sum) {
    yy = kernel_sum(y, y, w, w, bandwidth, true) / denom;
  } else {
    yy = (kernel_sum(y, y, w, w, bandwidth, true) + sum_sq) / (sum * sum);
  }
  return xx + yy - 2.0 * xy;
}

double median_bandwidth(const Matrix& points, std::size_t max_points) {
  if (points.rows() < 2) throw InputError("median_bandwidth needs at least two points");
  const auto n = static_cast<std::size_t>(points.rows());
  const std::size_t take = std::min(n, std::max<std::size_t>(2, max_points));
  std::vector<Eigen::Index> rows(take);
  for (std::size_t k = 0; k < take; ++k) rows[k] = static_cast<Eigen::Index>(k * n / take);

  std::vector<double> dist;
  dist.reserve(take * (take - 1) / 2);
  for (std::size_t i = 0; i < take; ++i) {
    for (std::size_t j = i + 1; j < take; ++j) {
      const double d = (points.row(rows[i]) - points.row(rows[j])).norm();
      if (d > 0.0) dist.push_back(d);
    }
  }
  if (dist.empty()) return 1.0;
  return stats::median(std::move(dist));
}

MMDReport fig3_protocol(const data::Stream& stream, const omega::OmegaEstimator& est,
                        const Fig3Options& options) {
  if (stream.empty()) throw InputError("fig3_protocol: empty stream");
  std::map<int, std::vector<std::size_t>> by_time;
  for (std::size_t i = 0; i < stream.size(); ++i) by_time[stream[i].t].push_back(i);
  if (by_time.size() < 2) throw InputError("fig3_protocol: stream spans fewer than two steps");

  const auto dim = static_cast<Eigen::Index>(stream.front().x.size());
  Matrix features(static_cast<Eigen::Index>(stream.size()), dim);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    for (Eigen::Index k = 0; k < dim; ++k) features(static_cast<Eigen::Index>(i), k) = stream[i].x[k];
  }
  const auto inputs = omega::make_inputs(stream, options.inputs);
  const double h = options.bandwidth.value_or(median_bandwidth(features));

  auto gather = [&](const Matrix& src, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), src.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out.row(static_cast<Eigen::Index>(k)) = src.row(static_cast<Eigen::Index>(rows[k]));
    }
    return out;
  };

  MMDReport report;
  std::vector<std::size_t> past;
  for (auto it = by_time.begin(); it != by_time.end(); ++it) {
    const auto& [t, now] = *it;
    if (it != by_time.begin()) {
      const Matrix current = gather(features, now);
      const Matrix old = gather(features, past);
      std::vector<int> stamps;
      stamps.reserve(past.size());
      for (auto i : past) stamps.push_back(stream[i].t);
      const nn::Vector w = est.omegas(gather(inputs.x, past), t, stamps);
      MMDRecord rec;
      rec.t = t;
      rec.bandwidth = h;
      rec.n_current = now.size();
      rec.n_past = past.size();
      rec.mmd_unweighted = mmd2(current, old, h);
      rec.mmd_weighted = weighted_mmd2(current, old, std::span<const double>(w.data(), past.size()), h);
      report.records.push_back(rec);
    }
    past.insert(past.end(), now.begin(), now.end());
  }
  return report;
}

void write_report_csv(std::ostream& out, const MMDReport& report) {
  out << "t,mmd_unweighted,mmd_weighted,bandwidth,n_current,n_past\n";
  for (const auto& r : report.records) {
    out << r.t << ',' << text::format_double(r.mmd_unweighted) << ','
        << text::format_double(r.mmd_weighted) << ',' << text::format_double(r.bandwidth) << ','
        << r.n_current << ',' << r.n_past << '\n';
  }
}

}  // namespace dw::validate
