#include "driftweight/rl/agent.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "driftweight/errors.hpp"
#include "driftweight/omega/inputs.hpp"
#include "driftweight/text.hpp"

namespace dw::rl {

QTable::QTable(int states, int actions, QConfig config)
    : states_(states),
      actions_(actions),
      config_(config),
      online_(static_cast<std::size_t>(states) * actions, 0.0),
      target_(online_) {
  if (states < 1 || actions < 1) throw ValidationError("QTable: empty table");
  if (!(config.tau > 0.0 && config.tau <= 1.0)) throw ValidationError("QTable: tau must be in (0, 1]");
  if (!(config.gamma >= 0.0 && config.gamma <= 1.0)) throw ValidationError("QTable: gamma must be in [0, 1]");
}

std::size_t QTable::index(int s, int a) const {
  if (s < 0 || s >= states_ || a < 0 || a >= actions_) throw InputError("QTable: state or action out of range");
  return static_cast<std::size_t>(s) * actions_ + a;
}

int QTable::greedy(int s) const {
  const auto row = online_.begin() + static_cast<std::ptrdiff_t>(index(s, 0));
  return static_cast<int>(std::max_element(row, row + actions_) - row);
}

double QTable::max_target(int s) const {
  const auto row = target_.begin() + static_cast<std::ptrdiff_t>(index(s, 0));
  return *std::max_element(row, row + actions_);
}

void QTable::soft_update() {
  const double tau = config_.tau;
  for (std::size_t i = 0; i < online_.size(); ++i) {
    target_[i] = (1.0 - tau) * target_[i] + tau * online_[i];
  }
}

double td_update(QTable& q, std::span<const Transition> batch, std::span<const double> weights) {
  if (batch.empty()) throw InputError("td_update: empty batch");
  if (!weights.empty() && weights.size() != batch.size()) throw ShapeError("td_update: one weight per transition");
  const double b = static_cast<double>(batch.size());
  const double gamma = q.config().gamma;
  std::vector<double> delta(batch.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& tr = batch[i];
    const double target = tr.r + (tr.done ? 0.0 : gamma * q.max_target(tr.s_next));
    delta[i] = q.value(tr.s, tr.a) - target;
    loss += (weights.empty() ? 1.0 : weights[i]) * delta[i] * delta[i];
  }
  // Errors are taken at the pre-update values, then applied together.
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w == 0.0 || delta[i] == 0.0) continue;
    const auto& tr = batch[i];
    q.set_value(tr.s, tr.a, q.value(tr.s, tr.a) - q.config().learning_rate * w * delta[i] / b);
  }
  q.soft_update();
  return loss / b;
}

nn::Matrix state_action_features(std::span<const Transition> batch, int states, int actions) {
  nn::Matrix x = nn::Matrix::Zero(static_cast<Eigen::Index>(batch.size()), states + actions);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    x(row, batch[i].s) = 1.0;
    x(row, states + batch[i].a) = 1.0;
  }
  return x;
}

double weighted_td_update(QTable& q, std::span<const Transition> batch,
                          const omega::OmegaEstimator& est, int T_now, double* mean_omega) {
  if (!est.trained()) throw StateError("weighted_td_update: estimator has not been trained");
  if (batch.empty()) throw InputError("weighted_td_update: empty batch");
  std::vector<int> stamps;
  stamps.reserve(batch.size());
  for (const auto& tr : batch) stamps.push_back(tr.t);
  const nn::Vector w = est.omegas(state_action_features(batch, q.states(), q.actions()), T_now, stamps);
  if (mean_omega) *mean_omega = w.mean();
  return td_update(q, batch, std::span<const double>(w.data(), batch.size()));
}

int select_action(const QTable& q, int s, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("select_action: epsilon must be in [0, 1]");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, q.actions() - 1);
    return pick(rng);
  }
  return q.greedy(s);
}

double collect_episode(const DriftGrid& grid, const QTable& q, double epsilon, int episode,
                       Rng& rng, ReplayBuffer* buffer) {
  int s = grid.start;
  double total = 0.0;
  for (int step = 0; step < grid.episode_cap; ++step) {
    const int a = buffer ? select_action(q, s, epsilon, rng) : q.greedy(s);
    const auto out = env_step(grid, s, a, episode);
    total += out.reward;
    if (buffer) buffer->push({s, a, out.reward, out.next_state, episode, out.reached_goal});
    s = out.next_state;
    if (out.reached_goal) break;
  }
  return total;
}

void RLConfig::validate() const {
  grid.validate();
  if (episodes < 1) throw ValidationError("rl: episodes must be >= 1");
  if (burn_in_episodes < 0 || burn_in_episodes >= episodes) {
    throw ValidationError("rl: burn-in must be in [0, episodes)");
  }
  if (weighted && !force_unit_omega && burn_in_episodes < 2) {
    throw ValidationError("rl: the weighted variant needs >= 2 burn-in episodes to fit the estimator");
  }
  if (updates_per_episode < 0 || batch_size < 1) throw ValidationError("rl: bad update schedule");
  if (refresh_every < 1 || refresh_epochs < 1) throw ValidationError("rl: bad estimator refresh schedule");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw ValidationError("rl: epsilon values must be in [0, 1]");
  }
  if (epsilon_decay_episodes < 0) throw ValidationError("rl: epsilon decay must be >= 0");
  if (buffer_capacity == 0) throw ValidationError("rl: buffer capacity must be positive");
}

omega::EstimatorConfig RLConfig::default_estimator() {
  omega::EstimatorConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 4;
  cfg.batch_size = 256;
  return cfg;
}

namespace {

omega::TimedInputs buffer_inputs(const ReplayBuffer& buffer, int states, int actions) {
  std::vector<Transition> all(buffer.items().begin(), buffer.items().end());
  omega::TimedInputs in;
  in.x = state_action_features(all, states, actions);
  in.t.reserve(all.size());
  for (const auto& tr : all) in.t.push_back(tr.t);
  return in;
}

double epsilon_at(const RLConfig& cfg, int episode) {
  if (episode < cfg.burn_in_episodes) return 1.0;
  const int since = episode - cfg.burn_in_episodes;
  if (cfg.epsilon_decay_episodes == 0 || since >= cfg.epsilon_decay_episodes) return cfg.epsilon_end;
  const double frac = static_cast<double>(since) / cfg.epsilon_decay_episodes;
  return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);
}

}  // namespace

std::vector<CurvePoint> run_rl_seed(const RLConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int states = cfg.grid.states();
  QTable q(states, kActions, cfg.q);
  ReplayBuffer buffer(cfg.buffer_capacity);
  auto collect_rng = make_rng(seed, "collect");
  auto replay_rng = make_rng(seed, "replay");
  auto omega_rng = make_rng(seed, "omega_train");
  auto init_rng = make_rng(seed, "omega_init");

  const bool use_estimator = cfg.weighted && !cfg.force_unit_omega;
  std::optional<omega::OmegaEstimator> est;
  if (use_estimator) est.emplace(states + kActions, cfg.episodes, cfg.estimator, init_rng);

  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int e = 0; e < cfg.episodes; ++e) {
    collect_episode(cfg.grid, q, epsilon_at(cfg, e), e, collect_rng, &buffer);

    const bool learning = e + 1 >= cfg.burn_in_episodes;
    if (use_estimator && learning) {
      const int since = e + 1 - cfg.burn_in_episodes;
      if (since % cfg.refresh_every == 0) {
        omega::TrainOptions opts;
        opts.epochs = cfg.refresh_epochs;
        omega::train(*est, buffer_inputs(buffer, states, kActions), opts, omega_rng);
      }
    }

    double omega_sum = 0.0;
    int omega_batches = 0;
    if (learning) {
      for (int u = 0; u < cfg.updates_per_episode; ++u) {
        const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_size), replay_rng);
        if (use_estimator) {
          double m = 1.0;
          weighted_td_update(q, batch, *est, e, &m);
          omega_sum += m;
          ++omega_batches;
        } else {
          td_update(q, batch);
        }
      }
    }
    const double ret = collect_episode(cfg.grid, q, 0.0, e, collect_rng, nullptr);
    curve.push_back({seed, e, ret, buffer.size(), omega_batches > 0 ? omega_sum / omega_batches : 1.0});
  }
  return curve;
}

std::vector<std::vector<CurvePoint>> run_rl_experiment(const RLConfig& config,
                                                       std::span<const std::uint64_t> seeds,
                                                       int jobs) {
  config.validate();
  if (seeds.empty()) throw ValidationError("rl: no seeds");
  if (jobs < 1) throw ValidationError("rl: jobs must be >= 1");
  std::vector<std::vector<CurvePoint>> out(seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        out[i] = run_rl_seed(config, seeds[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), seeds.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

double final_mean_return(std::span<const CurvePoint> curve, double fraction) {
  if (curve.empty()) throw InputError("final_mean_return: empty curve");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InputError("final_mean_return: fraction must be in (0, 1]");
  const auto n = curve.size();
  const auto take = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));
  double sum = 0.0;
  for (std::size_t i = n - take; i < n; ++i) sum += curve[i].eval_return;
  return sum / static_cast<double>(take);
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "seed,episode,eval_return,buffer_size,mean_omega\n";
  for (const auto& p : curve) {
    out << p.seed << ',' << p.episode << ',' << text::format_double(p.eval_return) << ','
        << p.buffer_size << ',' << text::format_double(p.mean_omega) << '\n';
  }
}

}  // namespace dw::rl
