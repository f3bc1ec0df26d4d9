#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dw {

using Rng = std::mt19937_64;

/// FNV-1a over bytes; stable across platforms, used for seed derivation and config hashes.
constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for a (master seed, component, index) triple. Components that must stay
/// decoupled (training draws vs. test draws vs. estimator minibatches) use distinct names.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view component,
                                    std::int64_t index = 0) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ fnv1a(component));
  h = splitmix64(h ^ static_cast<std::uint64_t>(index));
  return h;
}

inline Rng make_rng(std::uint64_t master, std::string_view component, std::int64_t index = 0) {
  return Rng(derive_seed(master, component, index));
}

}  // namespace dw
