#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "driftweight/random.hpp"

namespace dw::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using VectorMap = Eigen::Map<Vector>;
using ConstVectorMap = Eigen::Map<const Vector>;

enum class Activation { relu, identity };
enum class Norm { none, batchnorm };
enum class Mode { train, infer };

struct LayerSpec {
  int in = 0;
  int out = 0;
  Activation activation = Activation::identity;
  Norm norm = Norm::none;

  bool operator==(const LayerSpec&) const = default;
};

/// Intermediate values of one forward pass, kept for backpropagation.
struct Tape {
  struct Layer {
    Matrix input;       // activations entering the layer
    Matrix pre;         // x W^T + b
    Matrix normalized;  // batchnorm z-score (empty without batchnorm)
    Vector mean;        // statistics actually used for normalization
    Vector inv_std;
    Vector batch_var;   // biased batch variance, train mode only
    Matrix output;      // post-activation
  };
  Mode mode = Mode::infer;
  std::vector<Layer> layers;

  const Matrix& output() const { return layers.back().output; }
};

/// Dense feed-forward network with ReLU/identity activations and optional batch
/// normalization on hidden layers. All trainable parameters live in one flat vector
/// (per layer: weight row-major [out x in], bias, then batchnorm scale and shift), so
/// optimizers, snapshots and target-network blending operate on a single span.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<LayerSpec> layers);

  /// Hidden layers use ReLU (and batchnorm when requested); the output layer is linear.
  static DenseNet mlp(int in, std::span<const int> hidden, int out, bool batchnorm = false);

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)); biases and shifts zero, scales one.
  void init_glorot(Rng& rng);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  int input_size() const { return layers_.front().in; }
  int output_size() const { return layers_.back().out; }
  bool empty() const { return layers_.empty(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  MatrixMap weight(std::size_t k);
  ConstMatrixMap weight(std::size_t k) const;
  VectorMap bias(std::size_t k);
  ConstVectorMap bias(std::size_t k) const;
  VectorMap bn_scale(std::size_t k);
  ConstVectorMap bn_scale(std::size_t k) const;
  VectorMap bn_shift(std::size_t k);
  ConstVectorMap bn_shift(std::size_t k) const;

  Vector& running_mean(std::size_t k) { return running_mean_[k]; }
  const Vector& running_mean(std::size_t k) const { return running_mean_[k]; }
  Vector& running_var(std::size_t k) { return running_var_[k]; }
  const Vector& running_var(std::size_t k) const { return running_var_[k]; }

  /// Throws ShapeError on a column mismatch, InputError on empty or non-finite input.
  Matrix forward(const Matrix& batch, Mode mode = Mode::infer) const;
  Tape record(const Matrix& batch, Mode mode) const;

  /// Gradient of a scalar loss w.r.t. the flat parameter vector, given dLoss/dOutput.
  Vector backward(const Tape& tape, const Matrix& d_output) const;

  /// Folds the batch statistics of a train-mode tape into the running estimates.
  void update_running_stats(const Tape& tape, double momentum = 0.1);

  static constexpr double kBatchNormEps = 1e-5;

 private:
  struct Offsets {
    std::size_t weight = 0;
    std::size_t bias = 0;
    std::size_t scale = 0;
    std::size_t shift = 0;
  };

  void check_input(const Matrix& batch) const;

  std::vector<LayerSpec> layers_;
  std::vector<Offsets> offsets_;
  std::vector<double> params_;
  std::vector<Vector> running_mean_;
  std::vector<Vector> running_var_;
};

/// Loss callback: receives the network output and fills dLoss/dOutput.
using LossFn = std::function<double(const Matrix& output, Matrix& d_output)>;

struct LossAndGrad {
  double loss = 0.0;
  Vector grad;
  Tape tape;
};

/// Evaluates the loss at the current parameters and its analytic gradient.
/// Throws NumericError when the loss or any gradient entry is non-finite.
LossAndGrad grad(const DenseNet& net, const Matrix& batch, const LossFn& loss,
                 Mode mode = Mode::train);

}  // namespace dw::nn
