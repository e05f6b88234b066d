// SPDX-License-Identifier: Apache-2.0
#include "mkhbm/rng.hpp"

namespace mkhbm {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t key = splitmix64(master);
  for (std::uint64_t step : path) {
    key = splitmix64(key ^ splitmix64(step + 0x632be59bd9b4e019ULL));
  }
  return key;
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

}  // namespace mkhbm
