#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace dw::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Decoupled decay: params shrink by learning_rate * weight_decay per step.
  double weight_decay = 0.0;
};

struct AdamState {
  AdamState() = default;
  AdamState(std::size_t parameter_count, AdamConfig config);

  AdamConfig config;
  std::int64_t step = 0;
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
};

/// One bias-corrected Adam update in place. Throws ShapeError when the parameter,
/// gradient and moment sizes disagree, InputError on non-finite gradients.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace dw::nn
