#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "driftweight/errors.hpp"
#include "driftweight/omega/estimator.hpp"
#include "driftweight/omega/inputs.hpp"
#include "driftweight/omega/propensity.hpp"
#include "driftweight/stats.hpp"

using namespace dw;
using namespace dw::omega;

namespace {

TimedInputs gaussian_inputs(std::span<const double> means, int per_step, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  TimedInputs in;
  in.x.resize(static_cast<Eigen::Index>(means.size()) * per_step, 1);
  for (std::size_t t = 0; t < means.size(); ++t) {
    for (int i = 0; i < per_step; ++i) {
      in.x(static_cast<Eigen::Index>(in.t.size()), 0) = means[t] + n(rng);
      in.t.push_back(static_cast<int>(t));
    }
  }
  return in;
}

EstimatorConfig small_config(Method m, bool zero_out = false) {
  EstimatorConfig cfg;
  cfg.method = m;
  cfg.hidden = {8, 8};
  cfg.frequencies = 2;
  cfg.zero_output_init = zero_out;
  cfg.clip = std::nullopt;
  return cfg;
}

double softplus(double u) { return std::log1p(std::exp(-std::abs(u))) + std::max(u, 0.0); }

}  // namespace

TEST_CASE("generate_data contract") {
  Rng rng(1);
  std::vector<int> times;
  const std::vector<int> present = {0, 1, 2, 3, 5, 8};
  for (int rep = 0; rep < 2000; ++rep)
    for (int t : present) times.push_back(t);
  const auto quads = generate_data(times, rng);
  REQUIRE(quads.size() == times.size());

  std::map<int, double> neg_counts;
  double positives = 0;
  for (std::size_t j = 0; j < quads.size(); ++j) {
    CHECK(quads[j].row == j);
    CHECK(quads[j].t_pos == times[j]);
    CHECK(quads[j].t_neg != quads[j].t_pos);
    CHECK(std::count(present.begin(), present.end(), quads[j].t_neg) == 1);
    if (quads[j].z == 1) positives += 1;
    else CHECK(quads[j].z == -1);
    if (quads[j].t_pos == 0) neg_counts[quads[j].t_neg] += 1;
  }
  const double n = static_cast<double>(quads.size());
  CHECK(std::abs(positives / n - 0.5) < 3.0 * std::sqrt(0.25 / n));

  std::vector<double> observed, expected;
  for (const auto& [t, c] : neg_counts) {
    observed.push_back(c);
    expected.push_back(2000.0 / 5.0);
  }
  CHECK(observed.size() == 5u);
  CHECK(stats::chi_square_p_value(observed, expected) > 0.01);
}

TEST_CASE("generate_data needs two distinct times") {
  Rng rng(0);
  const std::vector<int> one = {4, 4, 4};
  CHECK_THROWS_AS(generate_data(one, rng), DegenerateError);
}

TEST_CASE("time encoding rows follow the sinusoid formula") {
  const TimeEncoding enc(20, 3);
  CHECK(enc.dim() == 7);
  for (int t : {0, 7, 20}) {
    const auto row = enc.row(t);
    CHECK(row[0] == doctest::Approx(t / 20.0));
    for (int k = 0; k < 3; ++k) {
      const double phase = std::pow(2.0, k) * 2.0 * M_PI * t / 20.0;
      CHECK(row[1 + 2 * k] == doctest::Approx(std::sin(phase)));
      CHECK(row[2 + 2 * k] == doctest::Approx(std::cos(phase)));
    }
  }
  CHECK_THROWS_AS(enc.row(21), RangeError);
}

TEST_CASE("inputs append a one-hot label when asked") {
  data::Stream s = {{{0.5, -1.0}, 2, 0}, {{1.5, 2.0}, 0, 3}};
  const auto plain = make_inputs(s, {false, 3});
  CHECK(plain.dim() == 2);
  const auto joint = make_inputs(s, {true, 3});
  REQUIRE(joint.dim() == 5);
  CHECK(joint.x(0, 4) == 1.0);
  CHECK(joint.x(0, 2) + joint.x(0, 3) == 0.0);
  CHECK(joint.x(1, 2) == 1.0);
  CHECK(joint.t == std::vector<int>{0, 3});
  s[1].y.reset();
  CHECK_THROWS_AS(make_inputs(s, {true, 3}), InputError);
}

TEST_CASE("loss matches the scalar softplus form for both methods") {
  Rng rng(7);
  const std::vector<double> means = {0.0, 0.4, 0.9};
  const auto data = gaussian_inputs(means, 10, rng);
  const auto quads = generate_data(data.t, rng);
  for (auto m : {Method::method1, Method::method2}) {
    CAPTURE(method_name(m));
    OmegaEstimator est(1, 3, small_config(m), rng);
    double expected = 0.0;
    for (const auto& q : quads) {
      const double x[1] = {data.x(static_cast<Eigen::Index>(q.row), 0)};
      if (m == Method::method1) {
        // z only picks the orientation; either way the current time should outscore the other.
        expected += softplus(-(est.score(x, q.t_pos) - est.score(x, q.t_neg)));
      } else {
        const int t2 = q.z > 0 ? q.t_pos : q.t_neg;
        expected += softplus(-q.z * est.score(x, t2));
      }
    }
    expected /= static_cast<double>(quads.size());
    CHECK(pairwise_logistic_loss(est, data, quads) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("zero-initialised output gives log 2 loss and unit weights") {
  Rng rng(2);
  const std::vector<double> means = {0.0, 1.0};
  const auto data = gaussian_inputs(means, 20, rng);
  const auto quads = generate_data(data.t, rng);
  for (auto m : {Method::method1, Method::method2}) {
    OmegaEstimator est(1, 2, small_config(m, true), rng);
    CHECK(pairwise_logistic_loss(est, data, quads) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    const double x[1] = {0.3};
    CHECK(est.omega(x, 1, 0) == 1.0);
  }
}

TEST_CASE("gradient of the contrastive loss matches central differences") {
  Rng rng(5);
  const std::vector<double> means = {0.0, 0.5, 1.0, 1.5};
  const auto data = gaussian_inputs(means, 6, rng);
  int checked = 0;
  for (auto m : {Method::method1, Method::method2}) {
    for (int trial = 0; trial < 6; ++trial) {
      OmegaEstimator est(1, 4, small_config(m), rng);
      const auto quads = generate_data(data.t, rng);
      const auto lg = pairwise_logistic_grad(est, data, quads, nn::Mode::infer);
      // A pre-activation sitting on the ReLU kink makes the one-sided slopes differ.
      double closest = 1e9;
      for (std::size_t l = 0; l + 1 < lg.tape.layers.size(); ++l) {
        closest = std::min(closest, lg.tape.layers[l].pre.cwiseAbs().minCoeff());
      }
      if (closest < 1e-5) continue;
      ++checked;
      auto p = est.net().parameters();
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double keep = p[k], h = 1e-6;
        p[k] = keep + h;
        const double up = pairwise_logistic_loss(est, data, quads);
        p[k] = keep - h;
        const double down = pairwise_logistic_loss(est, data, quads);
        p[k] = keep;
        const double fd = (up - down) / (2 * h);
        const double an = lg.grad(static_cast<Eigen::Index>(k));
        CHECK(std::abs(an - fd) <= 1e-6 * std::max(1.0, std::abs(an) + std::abs(fd)));
      }
    }
  }
  CHECK(checked >= 9);
}

TEST_CASE("weight identities and clipping") {
  Rng rng(3);
  auto cfg = small_config(Method::method1);
  OmegaEstimator est(2, 10, cfg, rng);
  std::normal_distribution<double> n(0.0, 2.0);
  std::uniform_int_distribution<int> tt(0, 10);
  for (int i = 0; i < 200; ++i) {
    const double x[2] = {n(rng), n(rng)};
    const int a = tt(rng), b = tt(rng);
    CHECK(est.omega_unclipped(x, a, a) == 1.0);
    CHECK(est.log_omega(x, a, b) + est.log_omega(x, b, a) == 0.0);
    CHECK(est.omega_unclipped(x, a, b) * est.omega_unclipped(x, b, a) == doctest::Approx(1.0).epsilon(1e-12));
  }
  est.set_clip(1.0);
  nn::Matrix xs(300, 2);
  std::vector<int> ts;
  for (int i = 0; i < 300; ++i) {
    xs(i, 0) = n(rng);
    xs(i, 1) = n(rng);
    ts.push_back(tt(rng));
  }
  const auto w = est.omegas(xs, 7, ts);
  CHECK(w.maxCoeff() <= 1.0);
  CHECK(w.minCoeff() >= 0.0);
  for (int i = 0; i < 300; ++i) {
    const double x[2] = {xs(i, 0), xs(i, 1)};
    CHECK(w[i] == doctest::Approx(est.omega(x, 7, ts[i])).epsilon(1e-12));
  }
  const double x[2] = {0.0, 0.0};
  CHECK_THROWS_AS(est.omega(x, 11, 0), RangeError);
  CHECK_THROWS_AS(est.omega(x, 3, -1), RangeError);
}

TEST_CASE("training learns the direction of a mean shift") {
  Rng rng(8);
  const std::vector<double> means = {0.0, 1.0};
  const auto data = gaussian_inputs(means, 1500, rng);
  auto cfg = small_config(Method::method1, true);
  cfg.hidden = {32, 32};
  cfg.learning_rate = 3e-3;
  cfg.epochs = 30;
  cfg.batch_size = 256;
  OmegaEstimator est(1, 2, cfg, rng);
  CHECK_FALSE(est.trained());
  const auto report = train(est, data, {}, rng);
  CHECK(est.trained());
  CHECK(report.final_train_loss < std::log(2.0));
  // True log ratio between N(1,1) and N(0,1) is x - 0.5.
  for (double x : {-1.0, 0.5, 2.0}) {
    const double xs[1] = {x};
    CHECK(std::abs(est.log_omega(xs, 1, 0) - (x - 0.5)) < 0.35);
  }
}

TEST_CASE("training is reproducible for a fixed rng") {
  const std::vector<double> means = {0.0, 0.5, 1.0};
  auto run = [&] {
    Rng rng(4);
    const auto data = gaussian_inputs(means, 50, rng);
    auto cfg = small_config(Method::method2);
    cfg.epochs = 3;
    cfg.batch_size = 32;
    OmegaEstimator est(1, 3, cfg, rng);
    train(est, data, {}, rng);
    return std::vector<double>(est.net().parameters().begin(), est.net().parameters().end());
  };
  CHECK(run() == run());
}

TEST_CASE("estimator snapshot round-trips weights and settings") {
  Rng rng(6);
  auto cfg = small_config(Method::method2);
  cfg.clip = 1.5;
  cfg.weight_decay = 0.25;
  OmegaEstimator est(3, 12, cfg, rng);
  est.mark_trained();
  std::stringstream buf;
  write_snapshot(buf, est);
  const auto back = read_snapshot(buf);
  CHECK(back.method() == Method::method2);
  CHECK(back.clip() == std::optional<double>(1.5));
  CHECK(back.horizon() == 12);
  CHECK(back.trained());
  CHECK(back.config().weight_decay == 0.25);
  const double x[3] = {0.1, -0.7, 2.2};
  for (int t = 0; t <= 12; ++t) CHECK(back.omega(x, 12, t) == est.omega(x, 12, t));

  std::istringstream junk("omega 2\n");
  CHECK_THROWS_AS(read_snapshot(junk), IoError);
}

TEST_CASE("standard propensity recovers a Gaussian density ratio") {
  Rng rng(10);
  std::normal_distribution<double> n(0.0, 1.0);
  nn::Matrix p(3000, 1), q(3000, 1);
  for (int i = 0; i < 3000; ++i) {
    p(i, 0) = n(rng);
    q(i, 0) = 1.0 + n(rng);
  }
  PropensityConfig cfg;
  cfg.hidden = {16};
  cfg.epochs = 40;
  cfg.batch_size = 256;
  cfg.learning_rate = 3e-3;
  cfg.clip = std::nullopt;
  const auto model = fit_standard_propensity(p, q, cfg, rng);
  nn::Matrix probe(3, 1);
  probe << -1.0, 0.5, 2.0;
  const auto log_beta = model.log_beta(probe);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(log_beta[i] - (probe(i, 0) - 0.5)) < 0.3);

  CHECK_THROWS_AS(fit_standard_propensity(nn::Matrix(0, 1), q, cfg, rng), InputError);
  CHECK_THROWS_AS(fit_standard_propensity(p, nn::Matrix::Zero(2, 2), cfg, rng), ShapeError);
}
