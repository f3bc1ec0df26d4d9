#pragma once

#include <functional>
#include <span>
#include <vector>

#include "driftweight/data/schedule.hpp"
#include "driftweight/nn/dense_net.hpp"
#include "driftweight/random.hpp"

namespace dw::train {

/// Labelled, time-stamped feature rows for the task model.
struct Dataset {
  nn::Matrix x;
  std::vector<int> y;
  std::vector<int> t;

  std::size_t size() const { return y.size(); }
  int dim() const { return static_cast<int>(x.cols()); }
};

/// Throws InputError on unlabelled samples or labels outside [0, classes).
Dataset to_dataset(std::span<const data::TimedSample> samples, int classes);

/// Rows i with keep(i) true, in order.
Dataset subset(const Dataset& d, const std::function<bool(std::size_t)>& keep);

struct ModelConfig {
  std::vector<int> hidden = {64, 64};
  double learning_rate = 9e-4;
  int epochs = 20;
  int batch_size = 128;
  /// Second-stage epochs for finetune; negative means "same as epochs".
  int finetune_epochs = -1;
};

/// Softmax classifier over a DenseNet producing one logit per class.
class Classifier {
 public:
  Classifier() = default;
  Classifier(int input_dim, int classes, const ModelConfig& config, Rng& init_rng);

  int classes() const { return classes_; }
  const nn::DenseNet& net() const { return net_; }
  nn::DenseNet& net() { return net_; }

  std::vector<int> predict(const nn::Matrix& x) const;
  double accuracy(const Dataset& d) const;

 private:
  nn::DenseNet net_;
  int classes_ = 0;
};

/// Called after every optimizer step with the updated parameters.
using StepObserver = std::function<void(std::span<const double> params)>;

/// Minimizes the per-minibatch mean of w_i * cross_entropy_i with Adam (fresh moments).
/// Weights are constants; an empty span means all ones. Samples with zero weight never
/// enter a minibatch. Throws InputError on negative or non-finite weights, DegenerateError
/// when every weight is zero.
void fit(Classifier& model, const Dataset& d, std::span<const double> weights,
         const ModelConfig& config, int epochs, Rng& shuffle_rng,
         const StepObserver& observer = {});

/// Mean softmax cross-entropy and its gradient w.r.t. logits, scaled per row by weights.
double weighted_cross_entropy(const nn::Matrix& logits, std::span<const int> labels,
                              std::span<const double> weights, nn::Matrix* d_logits);

}  // namespace dw::train
