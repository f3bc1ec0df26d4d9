#pragma once

#include <span>
#include <vector>

namespace dw::stats {

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> v);
double stderr_of_mean(std::span<const double> v);
double median(std::vector<double> v);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

struct PairedTest {
  double mean_difference = 0.0;  // mean of (a - b)
  double t_statistic = 0.0;
  double p_two_sided = 1.0;
  int wins = 0;  // count of a > b
  int n = 0;
};

/// Paired Student t-test on a - b.
PairedTest paired_t_test(std::span<const double> a, std::span<const double> b);

/// Pearson chi-square goodness of fit against expected counts; returns the p-value.
double chi_square_p_value(std::span<const double> observed, std::span<const double> expected);

}  // namespace dw::stats
