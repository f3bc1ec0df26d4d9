#include "driftweight/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "driftweight/errors.hpp"

namespace dw::stats {

double mean(std::span<const double> v) {
  if (v.empty()) throw InputError("mean of an empty sequence");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double stderr_of_mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return stddev(v) / std::sqrt(static_cast<double>(v.size()));
}

double median(std::vector<double> v) {
  if (v.empty()) throw InputError("median of an empty sequence");
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double upper = v[mid];
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw InputError("spearman: need equal sizes >= 2");
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double ma = mean(ra);
  const double mb = mean(rb);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0.0 || db == 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

PairedTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw InputError("paired_t_test: need equal sizes >= 2");
  std::vector<double> diff(a.size());
  PairedTest result;
  result.n = static_cast<int>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff[i] = a[i] - b[i];
    if (a[i] > b[i]) ++result.wins;
  }
  result.mean_difference = mean(diff);
  const double se = stderr_of_mean(diff);
  if (se == 0.0) {
    result.t_statistic = result.mean_difference == 0.0 ? 0.0 : std::copysign(INFINITY, result.mean_difference);
    result.p_two_sided = result.mean_difference == 0.0 ? 1.0 : 0.0;
    return result;
  }
  result.t_statistic = result.mean_difference / se;
  boost::math::students_t dist(static_cast<double>(result.n - 1));
  result.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.t_statistic)));
  return result;
}

double chi_square_p_value(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.size() < 2) {
    throw InputError("chi_square_p_value: need equal sizes >= 2");
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) throw InputError("chi_square_p_value: expected counts must be positive");
    stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace dw::stats
