#include "driftweight/omega/propensity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftweight/errors.hpp"
#include "driftweight/nn/adam.hpp"

namespace dw::omega {

nn::Vector PropensityModel::logits(const nn::Matrix& x) const {
  return net_.forward(x, nn::Mode::infer).col(0);
}

nn::Vector PropensityModel::log_beta(const nn::Matrix& x) const { return -logits(x); }

nn::Vector PropensityModel::beta_unclipped(const nn::Matrix& x) const {
  return log_beta(x).array().exp().matrix();
}

nn::Vector PropensityModel::beta(const nn::Matrix& x) const {
  nn::Vector b = beta_unclipped(x);
  if (clip_) b = b.cwiseMin(*clip_);
  return b;
}

PropensityModel fit_standard_propensity(const nn::Matrix& p_samples, const nn::Matrix& q_samples,
                                        const PropensityConfig& config, Rng& rng) {
  if (p_samples.rows() == 0 || q_samples.rows() == 0) {
    throw InputError("fit_standard_propensity: both sample sets must be nonempty");
  }
  if (p_samples.cols() != q_samples.cols()) {
    throw ShapeError("fit_standard_propensity: dimension mismatch");
  }
  const auto n_p = p_samples.rows();
  const auto n_q = q_samples.rows();
  const auto n = n_p + n_q;
  const auto dim = p_samples.cols();

  auto net = nn::DenseNet::mlp(static_cast<int>(dim), config.hidden, 1);
  net.init_glorot(rng);
  nn::AdamState opt(net.parameter_count(), {.learning_rate = config.learning_rate, .weight_decay = config.weight_decay});

  // Class-balanced weights make each side contribute half of the objective.
  const double w_p = static_cast<double>(n) / (2.0 * static_cast<double>(n_p));
  const double w_q = static_cast<double>(n) / (2.0 * static_cast<double>(n_q));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const auto b = static_cast<Eigen::Index>(stop - start);
      nn::Matrix x(b, dim);
      std::vector<double> z(static_cast<std::size_t>(b));
      for (Eigen::Index i = 0; i < b; ++i) {
        const auto idx = order[start + i];
        if (idx < n_p) {
          x.row(i) = p_samples.row(idx);
          z[i] = 1.0;
        } else {
          x.row(i) = q_samples.row(idx - n_p);
          z[i] = -1.0;
        }
      }
      auto lg = nn::grad(net, x, [&](const nn::Matrix& out, nn::Matrix& d_out) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < b; ++i) {
          const double w = z[i] > 0 ? w_p : w_q;
          const double u = -z[i] * out(i, 0);
          total += w * (std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))));
          const double s = u >= 0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
          d_out(i, 0) = -z[i] * w * s / static_cast<double>(b);
        }
        return total / static_cast<double>(b);
      });
      nn::adam_step(net.parameters(),
                    std::span<const double>(lg.grad.data(), static_cast<std::size_t>(lg.grad.size())),
                    opt);
    }
  }
  return PropensityModel(std::move(net), config.clip);
}

}  // namespace dw::omega
