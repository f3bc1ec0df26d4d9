#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "driftweight/errors.hpp"
#include "driftweight/rl/agent.hpp"
#include "driftweight/rl/gridworld.hpp"
#include "driftweight/rl/replay.hpp"

using namespace dw;
using namespace dw::rl;

TEST_CASE("perimeter walks the border clockwise one cell at a time") {
  const auto p = perimeter(6, 6);
  REQUIRE(p.size() == 20u);
  CHECK(p.front() == 0);
  CHECK(p[1] == 1);
  const DriftGrid g = drifting_grid();
  CHECK(std::set<int>(p.begin(), p.end()).size() == 20u);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int r = p[i] / 6, c = p[i] % 6;
    CHECK((r == 0 || r == 5 || c == 0 || c == 5));
    CHECK(grid_distance(g, p[i], p[(i + 1) % p.size()]) == 1);
  }
  CHECK(g.period() == 20);
  CHECK(g.goal_at(3) == g.goal_at(23));
  CHECK(g.goal_at(3) != g.goal_at(4));
  CHECK(stationary_grid().goal_at(0) == stationary_grid().goal_at(17));
}

TEST_CASE("moves clip at walls and pay the goal reward only on the goal") {
  DriftGrid g = stationary_grid();
  const int corner = g.cell(5, 5);
  auto out = env_step(g, corner, static_cast<int>(Action::down), 0);
  CHECK(out.next_state == corner);
  CHECK(out.reward == g.step_penalty);
  CHECK_FALSE(out.reached_goal);
  out = env_step(g, g.cell(0, 1), static_cast<int>(Action::left), 0);
  CHECK(out.next_state == g.cell(0, 0));
  CHECK(out.reached_goal);
  CHECK(out.reward == g.goal_reward);
  out = env_step(g, g.cell(2, 2), static_cast<int>(Action::up), 0);
  CHECK(out.next_state == g.cell(1, 2));
  CHECK_THROWS_AS(env_step(g, 36, 0, 0), InputError);
  CHECK_THROWS_AS(env_step(g, 0, 4, 0), InputError);
  CHECK_THROWS_AS(env_step(g, 0, 0, -1), RangeError);
}

TEST_CASE("optimal return counts the shortest path") {
  const DriftGrid g = drifting_grid();
  for (int e = 0; e < g.period(); ++e) {
    const int d = grid_distance(g, g.start, g.goal_at(e));
    CHECK(optimal_return(g, e) == g.goal_reward + (d - 1) * g.step_penalty);
  }
}

TEST_CASE("replay buffer is a bounded FIFO") {
  ReplayBuffer buf(3);
  Rng rng(0);
  CHECK_THROWS_AS(buf.sample(1, rng), StateError);
  for (int i = 0; i < 5; ++i) buf.push({i, 0, 1.0, i, i, false});
  CHECK(buf.size() == 3u);
  CHECK(buf[0].s == 2);
  CHECK(buf[2].s == 4);
  CHECK_THROWS_AS(buf.push({0, 0, 1.0, 0, 3, false}), InputError);
  CHECK_THROWS_AS(buf.push({0, 0, NAN, 0, 9, false}), InputError);
  const auto draw = buf.sample(50, rng);
  CHECK(draw.size() == 50u);
  for (const auto& tr : draw) CHECK((tr.s >= 2 && tr.s <= 4));
  CHECK_THROWS_AS(ReplayBuffer(0), ValidationError);
}

TEST_CASE("TD update matches a hand computation") {
  QTable q(3, 2, QConfig{0.9, 0.5, 0.4});
  q.set_value(0, 1, 2.0);
  q.set_value(1, 0, 5.0);
  q.soft_update();  // target(1,0) = 2.5, target(0,1) = 1.0
  const std::vector<Transition> batch = {{0, 1, 1.0, 1, 0, false}, {2, 0, -1.0, 0, 0, true}};
  const std::vector<double> w = {0.5, 2.0};
  const double d0 = 2.0 - (1.0 + 0.9 * 2.5);
  const double d1 = 0.0 - (-1.0);
  const double loss = td_update(q, batch, w);
  CHECK(loss == doctest::Approx((0.5 * d0 * d0 + 2.0 * d1 * d1) / 2.0));
  CHECK(q.value(0, 1) == doctest::Approx(2.0 - 0.4 * 0.5 * d0 / 2.0));
  CHECK(q.value(2, 0) == doctest::Approx(0.0 - 0.4 * 2.0 * d1 / 2.0));
  CHECK(q.target_value(0, 1) == doctest::Approx(0.5 * 1.0 + 0.5 * q.value(0, 1)));
}

TEST_CASE("target network is an exponential moving average of the online table") {
  QTable q(2, 2, QConfig{0.99, 0.1, 1.0});
  q.set_value(1, 1, 4.0);
  for (int k = 1; k <= 25; ++k) {
    q.soft_update();
    CHECK(q.target_value(1, 1) == doctest::Approx(4.0 * (1.0 - std::pow(0.9, k))).epsilon(1e-12));
    CHECK(q.target_value(0, 0) == 0.0);
  }
}

TEST_CASE("unit weights leave the TD step unchanged") {
  Rng rng(1);
  const DriftGrid g = drifting_grid();
  ReplayBuffer buf;
  QTable seedq(g.states(), kActions, {});
  for (int e = 0; e < 5; ++e) collect_episode(g, seedq, 1.0, e, rng, &buf);
  QTable a(g.states(), kActions, {}), b(g.states(), kActions, {});
  for (int k = 0; k < 40; ++k) {
    const auto batch = buf.sample(16, rng);
    const double la = td_update(a, batch);
    const double lb = td_update(b, batch, std::vector<double>(batch.size(), 1.0));
    CHECK(la == lb);
  }
  CHECK(std::equal(a.online().begin(), a.online().end(), b.online().begin()));
  CHECK(std::equal(a.target().begin(), a.target().end(), b.target().begin()));
}

TEST_CASE("forcing omega to one reproduces the unweighted run exactly") {
  RLConfig cfg;
  cfg.episodes = 40;
  cfg.updates_per_episode = 10;
  cfg.weighted = false;
  const auto plain = run_rl_seed(cfg, 3);
  cfg.weighted = true;
  cfg.force_unit_omega = true;
  const auto forced = run_rl_seed(cfg, 3);
  REQUIRE(plain.size() == forced.size());
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(plain[i].eval_return == forced[i].eval_return);
    CHECK(plain[i].buffer_size == forced[i].buffer_size);
  }
}

TEST_CASE("weighted update needs a trained estimator and is plain TD when omega is flat") {
  const std::vector<Transition> batch = {{0, 1, 1.0, 1, 0, false}, {1, 2, -1.0, 2, 3, false}};
  omega::EstimatorConfig ec;
  ec.hidden = {4};
  Rng rng(0);
  omega::OmegaEstimator est(4 + kActions, 10, ec, rng);
  QTable q(4, kActions, {});
  CHECK_THROWS_AS(weighted_td_update(q, batch, est, 5), StateError);
  est.mark_trained();  // zero output layer, so omega == 1 everywhere
  QTable ref(4, kActions, {});
  double mean = 0.0;
  CHECK(weighted_td_update(q, batch, est, 5, &mean) == td_update(ref, batch));
  CHECK(mean == 1.0);
  CHECK(std::equal(q.online().begin(), q.online().end(), ref.online().begin()));
}

TEST_CASE("replay weights follow the phase of a periodic drift") {
  // State 0 dominates episodes whose (t / 10) is even, state 1 the others: period 20.
  Rng rng(4);
  ReplayBuffer buf;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int e = 0; e < 40; ++e) {
    const bool even_phase = (e / 10) % 2 == 0;
    for (int k = 0; k < 60; ++k) {
      const int s = (u(rng) < 0.8) == even_phase ? 0 : 1;
      buf.push({s, 0, -1.0, s, e, false});
    }
  }
  omega::EstimatorConfig ec;
  ec.hidden = {32, 32};
  ec.learning_rate = 3e-3;
  ec.epochs = 40;
  ec.batch_size = 256;
  ec.clip = std::nullopt;
  omega::OmegaEstimator est(2 + 1, 40, ec, rng);
  std::vector<Transition> all(buf.items().begin(), buf.items().end());
  omega::TimedInputs in;
  in.x = state_action_features(all, 2, 1);
  for (const auto& tr : all) in.t.push_back(tr.t);
  omega::train(est, in, {}, rng);

  const std::vector<Transition> probe = {{1, 0, 0, 1, 0, false}};
  const auto x = state_action_features(probe, 2, 1);
  const double row[3] = {x(0, 0), x(0, 1), x(0, 2)};
  // T = 25 falls in an even phase, where state 1 is four times rarer than at t = 15.
  const double same_phase = est.log_omega(row, 25, 5);
  const double other_phase = est.log_omega(row, 25, 15);
  CHECK(other_phase < -0.7);
  CHECK(same_phase > other_phase + 0.7);
  CHECK(std::abs(same_phase) < std::abs(other_phase));
}

TEST_CASE("rl config validation") {
  RLConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.burn_in_episodes = 1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.force_unit_omega = true;
  CHECK_NOTHROW(cfg.validate());
  cfg.epsilon_end = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("final-quarter mean and curve csv") {
  std::vector<CurvePoint> curve;
  for (int e = 0; e < 8; ++e) curve.push_back({0, e, static_cast<double>(e), 10u * e, 1.0});
  CHECK(final_mean_return(curve) == doctest::Approx(6.5));
  std::ostringstream csv;
  write_curve_csv(csv, curve);
  CHECK(csv.str().rfind("seed,episode,eval_return,buffer_size,mean_omega\n0,0,0,0,1\n", 0) == 0);
}
