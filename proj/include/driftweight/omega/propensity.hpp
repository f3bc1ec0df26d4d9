#pragma once

#include <optional>
#include <span>
#include <vector>

#include "driftweight/nn/dense_net.hpp"
#include "driftweight/random.hpp"

namespace dw::omega {

struct PropensityConfig {
  std::vector<int> hidden = {64, 64};
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  int epochs = 20;
  int batch_size = 512;
  std::optional<double> clip = 1.0;
};

/// Binary classifier g separating p-samples (z = +1) from q-samples (z = -1), fitted with
/// class-balanced logistic loss so g estimates log(p/q). beta(x) = exp(-g(x)) estimates dq/dp.
class PropensityModel {
 public:
  PropensityModel() = default;
  PropensityModel(nn::DenseNet net, std::optional<double> clip)
      : net_(std::move(net)), clip_(clip) {}

  const nn::DenseNet& net() const { return net_; }
  nn::Vector logits(const nn::Matrix& x) const;
  nn::Vector log_beta(const nn::Matrix& x) const;
  /// exp(-g), clipped to clip when configured.
  nn::Vector beta(const nn::Matrix& x) const;
  nn::Vector beta_unclipped(const nn::Matrix& x) const;

 private:
  nn::DenseNet net_;
  std::optional<double> clip_;
};

/// Throws InputError when either side is empty or their dimensions differ.
PropensityModel fit_standard_propensity(const nn::Matrix& p_samples, const nn::Matrix& q_samples,
                                        const PropensityConfig& config, Rng& rng);

}  // namespace dw::omega
