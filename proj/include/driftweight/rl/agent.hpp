#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "driftweight/omega/estimator.hpp"
#include "driftweight/random.hpp"
#include "driftweight/rl/gridworld.hpp"
#include "driftweight/rl/replay.hpp"

namespace dw::rl {

struct QConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double learning_rate = 1.0;
};

/// Tabular action values with a soft-updated target copy.
class QTable {
 public:
  QTable() = default;
  QTable(int states, int actions, QConfig config);

  int states() const { return states_; }
  int actions() const { return actions_; }
  const QConfig& config() const { return config_; }

  double value(int s, int a) const { return online_[index(s, a)]; }
  double target_value(int s, int a) const { return target_[index(s, a)]; }
  void set_value(int s, int a, double v) { online_[index(s, a)] = v; }
  /// Lowest-index action among the maxima.
  int greedy(int s) const;
  double max_target(int s) const;

  std::span<const double> online() const { return online_; }
  std::span<const double> target() const { return target_; }

  /// target <- (1 - tau) target + tau online.
  void soft_update();

 private:
  std::size_t index(int s, int a) const;

  int states_ = 0;
  int actions_ = 0;
  QConfig config_;
  std::vector<double> online_;
  std::vector<double> target_;
};

/// One step on L = mean_i w_i (Q(s_i, a_i) - r_i - gamma (1 - done_i) max_a' Q_target(s'_i, a'))^2,
/// moving each entry by learning_rate * dL/dQ / 2, then a soft target update. Weights are
/// constants; an empty span means all ones. Returns L before the step.
double td_update(QTable& q, std::span<const Transition> batch, std::span<const double> weights = {});

/// Estimator input rows [one-hot state, one-hot action].
nn::Matrix state_action_features(std::span<const Transition> batch, int states, int actions);

/// td_update with w_i = omega(s_i, a_i, T_now, t_i). Throws StateError when the estimator
/// has not been trained. When mean_omega is given it receives the batch mean weight.
double weighted_td_update(QTable& q, std::span<const Transition> batch,
                          const omega::OmegaEstimator& est, int T_now,
                          double* mean_omega = nullptr);

/// Uniform action with probability epsilon, greedy otherwise.
int select_action(const QTable& q, int s, double epsilon, Rng& rng);

/// epsilon-greedy rollout from the start cell until the goal or the episode cap. Every
/// transition is appended to `buffer` (stamped with `episode`) unless it is null.
/// Returns the undiscounted return.
double collect_episode(const DriftGrid& grid, const QTable& q, double epsilon, int episode,
                       Rng& rng, ReplayBuffer* buffer);

struct RLConfig {
  DriftGrid grid = drifting_grid();
  QConfig q;
  int episodes = 400;
  int burn_in_episodes = 10;  // uniform-random episodes before any update
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_episodes = 100;  // linear decay after burn-in
  int updates_per_episode = 50;
  int batch_size = 32;
  std::size_t buffer_capacity = 1'000'000;
  omega::EstimatorConfig estimator = default_estimator();
  int refresh_every = 10;  // K
  int refresh_epochs = 4;  // M
  bool weighted = true;
  /// Skip the estimator in the update (omega == 1) while keeping everything else.
  bool force_unit_omega = false;

  void validate() const;
  /// Default estimator settings for the RL loop (lr 1e-3, clip 1).
  static omega::EstimatorConfig default_estimator();
};

struct CurvePoint {
  std::uint64_t seed = 0;
  int episode = 0;
  double eval_return = 0.0;
  std::size_t buffer_size = 0;
  double mean_omega = 1.0;
};

/// One learning curve: per episode, collect (epsilon-greedy), refresh the estimator every
/// K episodes once burn-in ends, run the TD updates, then a greedy evaluation rollout that
/// is never stored.
std::vector<CurvePoint> run_rl_seed(const RLConfig& config, std::uint64_t seed);

/// run_rl_seed for every seed, spread over `jobs` threads; output in seed order.
std::vector<std::vector<CurvePoint>> run_rl_experiment(const RLConfig& config,
                                                       std::span<const std::uint64_t> seeds,
                                                       int jobs = 1);

/// Mean eval return over the last `fraction` of the episodes.
double final_mean_return(std::span<const CurvePoint> curve, double fraction = 0.25);

// seed,episode,eval_return,buffer_size,mean_omega
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve);

}  // namespace dw::rl
