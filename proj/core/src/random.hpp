// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace mtsrnn::detail {

/// Unbiased draw from [0, n) by rejection; stable across standard libraries.
inline std::uint64_t uniform_index(std::mt19937_64 &rng, std::uint64_t n) {
  const std::uint64_t limit = std::mt19937_64::max() -
                              (std::mt19937_64::max() % n) - 1;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw > limit);
  return draw % n;
}

/// Uniform in [0, 1) from the top 53 bits.
inline double uniform_unit(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class T> void shuffle(std::vector<T> &items, std::mt19937_64 &rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n,
                                                 std::mt19937_64 &rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  return order;
}

/// Independent stream for a (seed, purpose) pair.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

} // namespace mtsrnn::detail
