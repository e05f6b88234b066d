// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mkhbm {

/// SplitMix64 finalizer; used to turn structured (seed, index) keys into
/// well-mixed 64-bit engine seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derive a stream seed from a master seed and a path of indices, e.g.
/// derive_seed(master, {config, trial}). Distinct paths give independent
/// streams, so trials can run in any order.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// A seeded random stream. Owned by exactly one consumer at a time.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed);

  static RngStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return RngStream(derive_seed(master, path));
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() { return normal_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace mkhbm
