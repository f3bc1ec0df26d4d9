#include "driftweight/nn/adam.hpp"

#include <cmath>

#include "driftweight/errors.hpp"

namespace dw::nn {

AdamState::AdamState(std::size_t parameter_count, AdamConfig cfg)
    : config(cfg),
      first_moment(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count))),
      second_moment(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count))) {}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  const auto n = static_cast<Eigen::Index>(params.size());
  if (static_cast<Eigen::Index>(grads.size()) != n || state.first_moment.size() != n ||
      state.second_moment.size() != n) {
    throw ShapeError("adam_step: parameter, gradient and moment sizes differ");
  }
  Eigen::Map<const Eigen::VectorXd> g(grads.data(), n);
  if (!g.allFinite()) throw InputError("adam_step: non-finite gradient");
  Eigen::Map<Eigen::VectorXd> p(params.data(), n);

  const auto& cfg = state.config;
  state.step += 1;
  state.first_moment = cfg.beta1 * state.first_moment + (1.0 - cfg.beta1) * g;
  state.second_moment =
      cfg.beta2 * state.second_moment + (1.0 - cfg.beta2) * g.array().square().matrix();
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  if (cfg.weight_decay != 0.0) p *= 1.0 - cfg.learning_rate * cfg.weight_decay;
  p.array() -= cfg.learning_rate * (state.first_moment.array() / c1) /
               ((state.second_moment.array() / c2).sqrt() + cfg.epsilon);
}

}  // namespace dw::nn
