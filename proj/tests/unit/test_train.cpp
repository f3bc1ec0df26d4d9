#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "driftweight/errors.hpp"
#include "driftweight/train/benchmark.hpp"
#include "driftweight/train/classifier.hpp"
#include "driftweight/train/protocols.hpp"

using namespace dw;
using namespace dw::train;

namespace {

data::DriftSchedule small_walk() {
  data::DriftSchedule s;
  s.horizon = 6;
  s.samples_per_step = 40;
  s.gaussian.flip_period = 3;
  return s;
}

StepContext context(int t) {
  StepContext ctx;
  ctx.t = t;
  ctx.classes = 2;
  ctx.seed = 17;
  ctx.model.hidden = {8};
  ctx.model.epochs = 3;
  ctx.model.batch_size = 16;
  return ctx;
}

using Trajectory = std::vector<std::vector<double>>;

StepObserver recorder(Trajectory& out) {
  return [&out](std::span<const double> p) { out.emplace_back(p.begin(), p.end()); };
}

}  // namespace

TEST_CASE("weighted cross-entropy matches a hand computation") {
  nn::Matrix logits(2, 3);
  logits << 1.0, 2.0, 0.5, -1.0, 0.0, 3.0;
  const std::vector<int> labels = {1, 0};
  const std::vector<double> w = {0.5, 2.0};
  nn::Matrix d;
  const double loss = weighted_cross_entropy(logits, labels, w, &d);

  double expected = 0.0;
  for (int i = 0; i < 2; ++i) {
    double z = 0.0;
    for (int c = 0; c < 3; ++c) z += std::exp(logits(i, c));
    expected += w[i] * (std::log(z) - logits(i, labels[i]));
    for (int c = 0; c < 3; ++c) {
      const double g = w[i] * (std::exp(logits(i, c)) / z - (c == labels[i] ? 1.0 : 0.0)) / 2.0;
      CHECK(d(i, c) == doctest::Approx(g).epsilon(1e-12));
    }
  }
  CHECK(loss == doctest::Approx(expected / 2.0).epsilon(1e-12));

  nn::Matrix d_plain, d_ones;
  const std::vector<double> ones = {1.0, 1.0};
  CHECK(weighted_cross_entropy(logits, labels, {}, &d_plain) == weighted_cross_entropy(logits, labels, ones, &d_ones));
  CHECK(d_plain == d_ones);
}

TEST_CASE("dataset conversion rejects unusable labels") {
  data::Stream s = {{{0.1}, 1, 0}, {{0.2}, 0, 1}};
  const auto d = to_dataset(s, 2);
  CHECK(d.size() == 2u);
  CHECK(d.t == std::vector<int>{0, 1});
  s[0].y = 2;
  CHECK_THROWS_AS(to_dataset(s, 2), InputError);
  s[0].y.reset();
  CHECK_THROWS_AS(to_dataset(s, 2), InputError);
}

TEST_CASE("fit validates its weights") {
  const auto history = to_dataset(data::generate_stream(small_walk(), 1), 2);
  const auto ctx = context(2);
  Rng rng(1);
  Classifier model(1, 2, ctx.model, rng);
  std::vector<double> w(history.size(), 1.0);
  w[3] = -0.5;
  CHECK_THROWS_AS(fit(model, history, w, ctx.model, 1, rng), InputError);
  w[3] = NAN;
  CHECK_THROWS_AS(fit(model, history, w, ctx.model, 1, rng), InputError);
  std::fill(w.begin(), w.end(), 0.0);
  CHECK_THROWS_AS(fit(model, history, w, ctx.model, 1, rng), DegenerateError);
  CHECK_THROWS_AS(fit(model, history, std::vector<double>(3, 1.0), ctx.model, 1, rng), ShapeError);
}

TEST_CASE("unit weights reproduce the everything trajectory exactly") {
  const auto history = to_dataset(data::generate_stream(small_walk(), 3), 2);
  for (int t : {1, 4}) {
    Trajectory a, b;
    auto ca = context(t);
    ca.observer = recorder(a);
    train_everything(history, ca);
    auto cb = context(t);
    cb.observer = recorder(b);
    train_weighted(history, std::vector<double>(history.size(), 1.0), cb);
    REQUIRE(!a.empty());
    CHECK(a == b);
  }
}

TEST_CASE("an indicator of the current step reproduces recent") {
  const auto history = to_dataset(data::generate_stream(small_walk(), 4), 2);
  const int t = 3;
  std::vector<double> mask(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) mask[i] = history.t[i] == t ? 1.0 : 0.0;
  Trajectory a, b;
  auto ca = context(t);
  ca.observer = recorder(a);
  train_recent(history, ca);
  auto cb = context(t);
  cb.observer = recorder(b);
  train_weighted(history, mask, cb);
  REQUIRE(!a.empty());
  CHECK(a == b);
}

TEST_CASE("finetune runs both stages with the configured step counts") {
  const auto history = to_dataset(data::generate_stream(small_walk(), 5), 2);
  const int t = 2;
  auto ctx = context(t);
  ctx.model.finetune_epochs = 2;
  Trajectory steps;
  ctx.observer = recorder(steps);
  train_finetune(history, ctx);
  const std::size_t past = 80, now = 40, b = 16;
  CHECK(steps.size() == 3 * ((past + b - 1) / b) + 2 * ((now + b - 1) / b));
  CHECK_THROWS_AS(train_finetune(history, context(0)), InputError);
}

TEST_CASE("next-step evaluation stays inside the horizon") {
  const auto s = small_walk();
  const auto history = to_dataset(data::generate_stream(s, 1), 2);
  const auto model = train_recent(history, context(5));
  const double acc = evaluate_next_step(model, s, 5, 1);
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
  CHECK_THROWS_AS(evaluate_next_step(model, s, 6, 1), RangeError);
}

TEST_CASE("protocol names round-trip") {
  for (const char* name : {"everything", "recent", "finetune", "omega_weighted", "omega_weighted_m2", "beta_weighted"}) {
    CHECK(parse_protocol(name).name() == name);
  }
  CHECK(parse_protocol("omega_weighted_m1") == parse_protocol("omega_weighted"));
  CHECK_THROWS_AS(parse_protocol("sometimes"), ValidationError);
}

TEST_CASE("benchmark aggregates per step and is independent of the thread count") {
  BenchmarkConfig cfg;
  cfg.schedule = small_walk();
  cfg.model = context(0).model;
  cfg.estimator.hidden = {8};
  cfg.estimator.epochs = 2;
  cfg.estimator_refresh_epochs = 1;
  cfg.propensity.hidden = {8};
  cfg.propensity.epochs = 2;
  for (const char* p : {"recent", "omega_weighted", "beta_weighted"}) cfg.protocols.push_back(parse_protocol(p));
  cfg.seeds = {0, 1, 2};
  cfg.first_step = 2;
  cfg.test_size = 100;

  const auto serial = run_benchmark(cfg);
  cfg.jobs = 3;
  const auto parallel = run_benchmark(cfg);
  REQUIRE(serial.size() == 3u * 3u * 4u);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].protocol == parallel[i].protocol);
    CHECK(serial[i].seed == parallel[i].seed);
    CHECK(serial[i].t == parallel[i].t);
    CHECK(serial[i].accuracy == parallel[i].accuracy);
  }

  const auto rows = summarize(serial);
  CHECK(rows.size() == 3u * 4u);
  for (const auto& row : rows) {
    CHECK(row.seeds == 3);
    double sum = 0.0;
    for (const auto& r : serial) {
      if (r.protocol == row.protocol && r.t == row.t) sum += r.accuracy;
    }
    CHECK(row.mean == doctest::Approx(sum / 3.0));
  }

  std::ostringstream runs_csv, summary_csv;
  write_runs_csv(runs_csv, serial);
  write_summary_csv(summary_csv, rows);
  CHECK(runs_csv.str().rfind("protocol,seed,t,accuracy,n_train,wallclock_ms\n", 0) == 0);
  CHECK(summary_csv.str().rfind("protocol,t,mean_accuracy,stderr,seeds\n", 0) == 0);
}

TEST_CASE("benchmark config validation") {
  BenchmarkConfig cfg;
  cfg.schedule = small_walk();
  CHECK_THROWS_AS(cfg.validate(), ValidationError);  // no protocols
  cfg.protocols = {parse_protocol("recent")};
  cfg.first_step = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.first_step = 1;
  cfg.last_step = 6;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.last_step = 5;
  CHECK_NOTHROW(cfg.validate());
}
