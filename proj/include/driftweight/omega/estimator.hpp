#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "driftweight/nn/adam.hpp"
#include "driftweight/nn/dense_net.hpp"
#include "driftweight/omega/inputs.hpp"
#include "driftweight/random.hpp"

namespace dw::omega {

/// Contrastive record for fitting g(x, t): row indexes the sample in TimedInputs,
/// t_pos is the sample's own time and t_neg a different observed time. z in {-1, +1}
/// decides which of the two occupies the scored slot: z = +1 scores (x, t_pos) as the
/// positive pair, z = -1 scores (x, t_neg) as the negative one.
struct QuadrupleExample {
  std::size_t row = 0;
  int t_pos = 0;
  int t_neg = 0;
  int z = 1;

  bool operator==(const QuadrupleExample&) const = default;
};

/// One quadruple per input sample, in input order. t_neg is uniform over the distinct
/// observed times other than t_pos; z is +1 or -1 with probability 1/2.
/// Throws DegenerateError when fewer than two distinct times are present.
std::vector<QuadrupleExample> generate_data(std::span<const int> times, Rng& rng);

/// method1: exponential-family model, loss log(1 + exp(-z (g(x,t2) - g(x,t1)))).
/// method2: deviations from the time-marginal, loss log(1 + exp(-z g(x,t2))).
/// (t2, t1) = (t_pos, t_neg) when z = +1 and (t_neg, t_pos) when z = -1.
enum class Method { method1, method2 };

struct EstimatorConfig {
  Method method = Method::method1;
  std::optional<double> clip = 1.0;
  std::vector<int> hidden = {64, 64};
  bool batchnorm = false;
  int frequencies = 4;
  double learning_rate = 1e-4;
  double weight_decay = 0.0;
  int epochs = 200;
  int batch_size = 512;
  /// Reuse one quadruple set for all epochs instead of regenerating it every epoch.
  bool cache_quadruples = false;
  /// Start with g == 0 (omega == 1 everywhere) by zeroing the output layer.
  bool zero_output_init = true;
};

/// Time-contrast network g(x, t) and the weight omega(x, T, t) = exp(g(x,T) - g(x,t)).
class OmegaEstimator {
 public:
  OmegaEstimator() = default;
  OmegaEstimator(int input_dim, int horizon, EstimatorConfig config, Rng& init_rng);

  int input_dim() const { return input_dim_; }
  int horizon() const { return encoding_.horizon(); }
  Method method() const { return config_.method; }
  std::optional<double> clip() const { return config_.clip; }
  const EstimatorConfig& config() const { return config_; }
  const TimeEncoding& encoding() const { return encoding_; }
  const nn::DenseNet& net() const { return net_; }
  nn::DenseNet& net() { return net_; }
  bool trained() const { return trained_; }
  void mark_trained() { trained_ = true; }

  void set_clip(std::optional<double> clip) { config_.clip = clip; }

  /// Network input rows [x, encode(t)].
  nn::Matrix encode(const nn::Matrix& x, std::span<const int> t) const;

  double score(std::span<const double> x, int t) const;
  nn::Vector scores(const nn::Matrix& x, std::span<const int> t) const;

  /// g(x,T) - g(x,t); exactly zero when T == t.
  double log_omega(std::span<const double> x, int T, int t) const;
  double omega_unclipped(std::span<const double> x, int T, int t) const;
  /// exp(log_omega) clipped to [0, clip] when a clip is configured.
  double omega(std::span<const double> x, int T, int t) const;

  /// Batched omega(x_i, T, t_i). Rows with t_i == T get exactly 1 before clipping.
  nn::Vector omegas(const nn::Matrix& x, int T, std::span<const int> t) const;
  nn::Vector omegas_unclipped(const nn::Matrix& x, int T, std::span<const int> t) const;

  nn::AdamState& optimizer() { return optimizer_; }

 private:
  nn::Vector log_omegas(const nn::Matrix& x, int T, std::span<const int> t) const;
  void check_time(int t) const;

  int input_dim_ = 0;
  EstimatorConfig config_;
  TimeEncoding encoding_;
  nn::DenseNet net_;
  nn::AdamState optimizer_;
  bool trained_ = false;
};

/// Mean pairwise logistic loss over a batch of quadruples (softplus-stable).
double pairwise_logistic_loss(const OmegaEstimator& est, const TimedInputs& data,
                              std::span<const QuadrupleExample> batch);

/// Loss and gradient w.r.t. the estimator's flat parameters.
nn::LossAndGrad pairwise_logistic_grad(const OmegaEstimator& est, const TimedInputs& data,
                                       std::span<const QuadrupleExample> batch,
                                       nn::Mode mode = nn::Mode::train);

/// Fraction of quadruples whose scored sign agrees with z (method1: g(t_pos) > g(t_neg)).
double quadruple_accuracy(const OmegaEstimator& est, const TimedInputs& data,
                          std::span<const QuadrupleExample> quads);

struct TrainOptions {
  std::optional<int> epochs;      // defaults to config.epochs
  std::optional<int> batch_size;  // defaults to config.batch_size
  /// Held-out quadruples (over `holdout_data`) evaluated before and after training.
  const TimedInputs* holdout_data = nullptr;
  std::span<const QuadrupleExample> holdout;
};

struct TrainReport {
  int epochs = 0;
  std::int64_t updates = 0;
  double final_train_loss = 0.0;
  std::optional<double> initial_holdout_loss;
  std::optional<double> final_holdout_loss;
};

/// Regenerates quadruples every epoch (unless cached), minibatches them and applies Adam.
/// Continues from the estimator's current parameters, so repeated calls warm-start.
TrainReport train(OmegaEstimator& est, const TimedInputs& data, const TrainOptions& options,
                  Rng& rng);

// Snapshot: header (mode, clip, horizon, encoding, input dim) followed by the network.
void write_snapshot(std::ostream& out, const OmegaEstimator& est);
OmegaEstimator read_snapshot(std::istream& in);

const char* method_name(Method m);
Method parse_method(std::string_view name);

}  // namespace dw::omega
