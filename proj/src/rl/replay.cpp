#include "driftweight/rl/replay.hpp"

#include <cmath>

#include "driftweight/errors.hpp"

namespace dw::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValidationError("replay capacity must be positive");
}

void ReplayBuffer::push(const Transition& tr) {
  if (!std::isfinite(tr.r)) throw InputError("replay: non-finite reward");
  if (!items_.empty() && tr.t < items_.back().t) throw InputError("replay: episode stamps must not decrease");
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(tr);
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (items_.empty()) throw StateError("replay: sampling from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(items_[pick(rng)]);
  return out;
}

}  // namespace dw::rl
