#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "driftweight/random.hpp"

namespace dw::rl {

struct Transition {
  int s = 0;
  int a = 0;
  double r = 0.0;
  int s_next = 0;
  int t = 0;  // episode index
  bool done = false;

  bool operator==(const Transition&) const = default;
};

/// FIFO replay store; insertion order keeps episode stamps nondecreasing.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1'000'000);

  /// Throws InputError when tr.t is older than the newest stored stamp or r is not finite.
  void push(const Transition& tr);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  const Transition& operator[](std::size_t i) const { return items_[i]; }
  const std::deque<Transition>& items() const { return items_; }

  /// Uniform draw with replacement. Throws StateError when empty.
  std::vector<Transition> sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

}  // namespace dw::rl
