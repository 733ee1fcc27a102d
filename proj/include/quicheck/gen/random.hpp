#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>

#include "quicheck/wire/bytes.hpp"

namespace quicheck {

// Seeded random source. Distributions are implemented here rather than via
// <random> so a seed yields the same stream with every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [lo, hi].
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);
  // Uniform on [0, 1).
  double unit();
  bool chance(double p) { return unit() < p; }
  Bytes bytes(std::size_t n);
  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    std::array<std::uint8_t, N> out{};
    for (auto& b : out) b = static_cast<std::uint8_t>(next());
    return out;
  }
  // Index drawn with probability weights[i] / sum(weights). Throws
  // std::invalid_argument when no weight is positive.
  std::size_t weighted(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace quicheck
