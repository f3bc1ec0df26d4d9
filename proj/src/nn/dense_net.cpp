#include "driftweight/nn/dense_net.hpp"

#include <cmath>
#include <string>

#include "driftweight/errors.hpp"

namespace dw::nn {

namespace {

bool has_norm(const LayerSpec& spec) { return spec.norm == Norm::batchnorm; }

}  // namespace

DenseNet::DenseNet(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("DenseNet needs at least one layer");
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& spec = layers_[k];
    if (spec.in <= 0 || spec.out <= 0) {
      throw ShapeError("layer " + std::to_string(k) + " has a non-positive dimension");
    }
    if (k > 0 && layers_[k - 1].out != spec.in) {
      throw ShapeError("layer " + std::to_string(k) + " input " + std::to_string(spec.in) +
                       " does not chain with previous output " +
                       std::to_string(layers_[k - 1].out));
    }
    Offsets off;
    off.weight = cursor;
    cursor += static_cast<std::size_t>(spec.in) * spec.out;
    off.bias = cursor;
    cursor += spec.out;
    if (has_norm(spec)) {
      off.scale = cursor;
      cursor += spec.out;
      off.shift = cursor;
      cursor += spec.out;
    }
    offsets_.push_back(off);
    running_mean_.push_back(has_norm(spec) ? Vector::Zero(spec.out) : Vector());
    running_var_.push_back(has_norm(spec) ? Vector::Ones(spec.out) : Vector());
  }
  params_.assign(cursor, 0.0);
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (has_norm(layers_[k])) bn_scale(k).setOnes();
  }
}

DenseNet DenseNet::mlp(int in, std::span<const int> hidden, int out, bool batchnorm) {
  std::vector<LayerSpec> specs;
  int prev = in;
  for (int width : hidden) {
    specs.push_back({prev, width, Activation::relu, batchnorm ? Norm::batchnorm : Norm::none});
    prev = width;
  }
  specs.push_back({prev, out, Activation::identity, Norm::none});
  return DenseNet(std::move(specs));
}

void DenseNet::init_glorot(Rng& rng) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& spec = layers_[k];
    const double limit = std::sqrt(6.0 / (spec.in + spec.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto w = weight(k);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    bias(k).setZero();
    if (has_norm(spec)) {
      bn_scale(k).setOnes();
      bn_shift(k).setZero();
      running_mean_[k].setZero();
      running_var_[k].setOnes();
    }
  }
}

MatrixMap DenseNet::weight(std::size_t k) {
  return {params_.data() + offsets_[k].weight, layers_[k].out, layers_[k].in};
}
ConstMatrixMap DenseNet::weight(std::size_t k) const {
  return {params_.data() + offsets_[k].weight, layers_[k].out, layers_[k].in};
}
VectorMap DenseNet::bias(std::size_t k) { return {params_.data() + offsets_[k].bias, layers_[k].out}; }
ConstVectorMap DenseNet::bias(std::size_t k) const {
  return {params_.data() + offsets_[k].bias, layers_[k].out};
}
VectorMap DenseNet::bn_scale(std::size_t k) {
  return {params_.data() + offsets_[k].scale, has_norm(layers_[k]) ? layers_[k].out : 0};
}
ConstVectorMap DenseNet::bn_scale(std::size_t k) const {
  return {params_.data() + offsets_[k].scale, has_norm(layers_[k]) ? layers_[k].out : 0};
}
VectorMap DenseNet::bn_shift(std::size_t k) {
  return {params_.data() + offsets_[k].shift, has_norm(layers_[k]) ? layers_[k].out : 0};
}
ConstVectorMap DenseNet::bn_shift(std::size_t k) const {
  return {params_.data() + offsets_[k].shift, has_norm(layers_[k]) ? layers_[k].out : 0};
}

void DenseNet::check_input(const Matrix& batch) const {
  if (layers_.empty()) throw StateError("forward on an empty network");
  if (batch.rows() < 1) throw InputError("forward needs at least one row");
  if (batch.cols() != input_size()) {
    throw ShapeError("batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                     std::to_string(input_size()));
  }
  if (!batch.allFinite()) throw InputError("batch contains non-finite values");
}

Tape DenseNet::record(const Matrix& batch, Mode mode) const {
  check_input(batch);
  Tape tape;
  tape.mode = mode;
  tape.layers.resize(layers_.size());
  const Matrix* current = &batch;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& spec = layers_[k];
    auto& cache = tape.layers[k];
    cache.input = *current;
    cache.pre.noalias() = cache.input * weight(k).transpose();
    cache.pre.rowwise() += bias(k).transpose();

    Matrix affine;
    if (has_norm(spec)) {
      if (mode == Mode::train) {
        cache.mean = cache.pre.colwise().mean().transpose();
        Matrix centered = cache.pre.rowwise() - cache.mean.transpose();
        cache.batch_var = centered.array().square().colwise().mean().transpose();
        cache.inv_std = (cache.batch_var.array() + kBatchNormEps).rsqrt().matrix();
        cache.normalized = centered.array().rowwise() * cache.inv_std.transpose().array();
      } else {
        cache.mean = running_mean_[k];
        cache.inv_std = (running_var_[k].array() + kBatchNormEps).rsqrt().matrix();
        cache.normalized = (cache.pre.rowwise() - cache.mean.transpose()).array().rowwise() *
                           cache.inv_std.transpose().array();
      }
      affine = cache.normalized.array().rowwise() * bn_scale(k).transpose().array();
      affine.rowwise() += bn_shift(k).transpose();
    } else {
      affine = cache.pre;
    }

    if (spec.activation == Activation::relu) {
      cache.output = affine.cwiseMax(0.0);
    } else {
      cache.output = std::move(affine);
    }
    current = &cache.output;
  }
  if (!tape.output().allFinite()) throw NumericError("forward produced non-finite output");
  return tape;
}

Matrix DenseNet::forward(const Matrix& batch, Mode mode) const {
  check_input(batch);
  Matrix current = batch;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& spec = layers_[k];
    Matrix z = current * weight(k).transpose();
    z.rowwise() += bias(k).transpose();
    if (has_norm(spec)) {
      Vector mean, inv_std;
      if (mode == Mode::train) {
        mean = z.colwise().mean().transpose();
        Vector var = (z.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
        inv_std = (var.array() + kBatchNormEps).rsqrt().matrix();
      } else {
        mean = running_mean_[k];
        inv_std = (running_var_[k].array() + kBatchNormEps).rsqrt().matrix();
      }
      z = ((z.rowwise() - mean.transpose()).array().rowwise() * inv_std.transpose().array())
              .rowwise() *
          bn_scale(k).transpose().array();
      z.rowwise() += bn_shift(k).transpose();
    }
    if (spec.activation == Activation::relu) z = z.cwiseMax(0.0);
    current = std::move(z);
  }
  if (!current.allFinite()) throw NumericError("forward produced non-finite output");
  return current;
}

Vector DenseNet::backward(const Tape& tape, const Matrix& d_output) const {
  if (tape.layers.size() != layers_.size()) throw ShapeError("tape does not belong to this network");
  const auto& last = tape.layers.back().output;
  if (d_output.rows() != last.rows() || d_output.cols() != last.cols()) {
    throw ShapeError("output gradient shape does not match the forward output");
  }
  Vector grad = Vector::Zero(static_cast<Eigen::Index>(params_.size()));
  Matrix delta = d_output;  // dLoss / d(layer output)
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& spec = layers_[k];
    const auto& cache = tape.layers[k];
    if (spec.activation == Activation::relu) {
      delta = (cache.output.array() > 0.0).select(delta, 0.0);
    }
    if (has_norm(spec)) {
      const double rows = static_cast<double>(delta.rows());
      VectorMap d_scale(grad.data() + offsets_[k].scale, spec.out);
      VectorMap d_shift(grad.data() + offsets_[k].shift, spec.out);
      d_scale = (delta.array() * cache.normalized.array()).colwise().sum().transpose();
      d_shift = delta.colwise().sum().transpose();
      Matrix d_norm = delta.array().rowwise() * bn_scale(k).transpose().array();
      if (tape.mode == Mode::train) {
        const Eigen::RowVectorXd sum_d = d_norm.colwise().sum();
        const Eigen::RowVectorXd sum_dz =
            (d_norm.array() * cache.normalized.array()).colwise().sum();
        Matrix centered = (rows * d_norm).rowwise() - sum_d;
        centered -= (cache.normalized.array().rowwise() * sum_dz.array()).matrix();
        delta = (centered.array().rowwise() * (cache.inv_std.transpose().array() / rows)).matrix();
      } else {
        delta = d_norm.array().rowwise() * cache.inv_std.transpose().array();
      }
    }
    MatrixMap d_weight(grad.data() + offsets_[k].weight, spec.out, spec.in);
    VectorMap d_bias(grad.data() + offsets_[k].bias, spec.out);
    d_weight.noalias() = delta.transpose() * cache.input;
    d_bias = delta.colwise().sum().transpose();
    if (k > 0) {
      Matrix next = delta * weight(k);
      delta = std::move(next);
    }
  }
  return grad;
}

void DenseNet::update_running_stats(const Tape& tape, double momentum) {
  if (tape.mode != Mode::train) return;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (!has_norm(layers_[k])) continue;
    const auto& cache = tape.layers[k];
    const double rows = static_cast<double>(cache.pre.rows());
    const Vector unbiased = rows > 1.0 ? Vector(cache.batch_var * (rows / (rows - 1.0)))
                                       : cache.batch_var;
    running_mean_[k] = (1.0 - momentum) * running_mean_[k] + momentum * cache.mean;
    running_var_[k] = (1.0 - momentum) * running_var_[k] + momentum * unbiased;
  }
}

LossAndGrad grad(const DenseNet& net, const Matrix& batch, const LossFn& loss, Mode mode) {
  LossAndGrad result;
  result.tape = net.record(batch, mode);
  Matrix d_output = Matrix::Zero(result.tape.output().rows(), result.tape.output().cols());
  result.loss = loss(result.tape.output(), d_output);
  if (!std::isfinite(result.loss)) throw NumericError("loss is not finite");
  result.grad = net.backward(result.tape, d_output);
  if (!result.grad.allFinite()) throw NumericError("gradient is not finite");
  return result;
}

}  // namespace dw::nn
