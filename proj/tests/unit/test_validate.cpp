#include <doctest.h>

#include <cmath>
#include <sstream>

#include "driftweight/errors.hpp"
#include "driftweight/omega/estimator.hpp"
#include "driftweight/stats.hpp"
#include "driftweight/validate/mmd.hpp"

using namespace dw;
using namespace dw::validate;

namespace {

Matrix normal_rows(int n, int d, double mean, Rng& rng) {
  std::normal_distribution<double> g(mean, 1.0);
  Matrix m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = g(rng);
  return m;
}

// Population MMD^2 between N(0,1) and N(delta,1) under exp(-u^2 / (2 h^2)).
double gaussian_mmd2(double delta, double h) {
  const double s = h * h + 2.0;
  return 2.0 * h / std::sqrt(s) * (1.0 - std::exp(-delta * delta / (2.0 * s)));
}

}  // namespace

TEST_CASE("unbiased MMD matches the closed form for shifted Gaussians") {
  Rng rng(1);
  for (double delta : {1.0, 2.0}) {
    for (double h : {0.7, 1.5}) {
      // Averaging five draws keeps the sampling spread near 3% of the target.
      std::vector<double> estimates;
      for (int rep = 0; rep < 5; ++rep) {
        estimates.push_back(mmd2(normal_rows(2000, 1, 0.0, rng), normal_rows(2000, 1, delta, rng), h));
      }
      const double expected = gaussian_mmd2(delta, h);
      CAPTURE(delta);
      CAPTURE(h);
      CHECK(std::abs(stats::mean(estimates) - expected) < 0.1 * expected);
    }
  }
}

TEST_CASE("MMD of identical distributions is centred on zero") {
  Rng rng(2);
  std::vector<double> values;
  for (int rep = 0; rep < 20; ++rep) values.push_back(mmd2(normal_rows(200, 2, 0, rng), normal_rows(200, 2, 0, rng), 1.0));
  CHECK(std::abs(stats::mean(values)) < 3.0 * stats::stderr_of_mean(values) + 1e-4);
}

TEST_CASE("MMD is symmetric and scale invariant with a matching bandwidth") {
  Rng rng(3);
  const auto x = normal_rows(150, 3, 0.0, rng);
  const auto y = normal_rows(90, 3, 0.4, rng);
  CHECK(mmd2(x, y, 1.3) == mmd2(y, x, 1.3));
  CHECK(mmd2(5.0 * x, 5.0 * y, 6.5) == doctest::Approx(mmd2(x, y, 1.3)).epsilon(1e-9));
}

TEST_CASE("unit weights reduce weighted MMD to the plain estimate") {
  Rng rng(4);
  const auto x = normal_rows(120, 2, 0.0, rng);
  const auto y = normal_rows(300, 2, 0.7, rng);
  const std::vector<double> ones(300, 1.0), threes(300, 3.0);
  CHECK(weighted_mmd2(x, y, ones, 1.0) == doctest::Approx(mmd2(x, y, 1.0)).epsilon(1e-10));
  CHECK(weighted_mmd2(x, y, threes, 1.0) == doctest::Approx(mmd2(x, y, 1.0)).epsilon(1e-10));
}

TEST_CASE("density-ratio weights remove a covariate shift") {
  Rng rng(5);
  const auto current = normal_rows(2000, 1, 1.0, rng);
  const auto past = normal_rows(4000, 1, 0.0, rng);
  std::vector<double> w(4000);
  for (int i = 0; i < 4000; ++i) w[i] = std::exp(past(i, 0) - 0.5);
  const double plain = mmd2(current, past, 1.0);
  const double weighted = weighted_mmd2(current, past, w, 1.0);
  CHECK(plain > 0.1);
  CHECK(std::abs(weighted) < 0.15 * plain);
}

TEST_CASE("MMD input checks") {
  const Matrix one = Matrix::Zero(1, 2), two = Matrix::Zero(2, 2);
  CHECK_THROWS_AS(mmd2(one, two, 1.0), InputError);
  CHECK_THROWS_AS(mmd2(two, Matrix::Zero(2, 3), 1.0), ShapeError);
  CHECK_THROWS_AS(mmd2(two, two, 0.0), InputError);
  CHECK_THROWS_AS(weighted_mmd2(two, two, std::vector<double>{0.0, 0.0}, 1.0), InputError);
  CHECK_THROWS_AS(weighted_mmd2(two, two, std::vector<double>{1.0, -1.0}, 1.0), InputError);
}

TEST_CASE("median bandwidth") {
  Matrix pair(2, 1);
  pair << 1.0, 4.0;
  CHECK(median_bandwidth(pair) == doctest::Approx(3.0));

  Rng rng(6);
  const auto pts = normal_rows(40, 3, 0.0, rng);
  Matrix doubled(80, 3);
  doubled << pts, pts;
  CHECK(median_bandwidth(doubled) == doctest::Approx(median_bandwidth(pts)).epsilon(0.05));

  // |X - X'| for standard normals in 1-D is sqrt(2)|N(0,1)|, median sqrt(2) * 0.67449.
  const auto line = normal_rows(2000, 1, 0.0, rng);
  CHECK(median_bandwidth(line) == doctest::Approx(std::sqrt(2.0) * 0.6744898).epsilon(0.05));

  CHECK(median_bandwidth(Matrix::Constant(5, 2, 3.0)) == 1.0);
}

TEST_CASE("report has one row per step after the first and unit weights agree") {
  data::DriftSchedule s;
  s.horizon = 8;
  s.samples_per_step = 60;
  const auto stream = data::generate_stream(s, 3);
  omega::EstimatorConfig cfg;
  cfg.hidden = {4};
  Rng rng(0);
  const omega::OmegaEstimator flat(1, 8, cfg, rng);  // zero output layer: omega == 1
  const auto report = fig3_protocol(stream, flat);
  REQUIRE(report.records.size() == 7u);
  for (std::size_t k = 0; k < report.records.size(); ++k) {
    const auto& r = report.records[k];
    CHECK(r.t == static_cast<int>(k) + 1);
    CHECK(r.n_current == 60u);
    CHECK(r.n_past == 60u * (k + 1));
    CHECK(r.mmd_weighted == doctest::Approx(r.mmd_unweighted).epsilon(1e-9));
    CHECK(r.bandwidth == report.records.front().bandwidth);
  }
  std::ostringstream csv;
  write_report_csv(csv, report);
  CHECK(csv.str().rfind("t,mmd_unweighted,mmd_weighted,bandwidth,n_current,n_past\n", 0) == 0);

  const data::Stream single(stream.begin(), stream.begin() + 60);
  CHECK_THROWS_AS(fig3_protocol(single, flat), InputError);
}

TEST_CASE("a stationary stream gives a flat curve near zero") {
  data::DriftSchedule s;
  s.horizon = 10;
  s.samples_per_step = 150;
  s.gaussian.d = 0.0;
  const auto stream = data::generate_stream(s, 4);
  omega::EstimatorConfig cfg;
  cfg.hidden = {4};
  Rng rng(0);
  const omega::OmegaEstimator flat(1, 10, cfg, rng);
  for (const auto& r : fig3_protocol(stream, flat).records) CHECK(std::abs(r.mmd_unweighted) < 0.03);
}
