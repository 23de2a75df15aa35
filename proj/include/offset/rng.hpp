#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "offset/errors.hpp"

namespace offset {

// Every randomized component draws through the helpers below instead of
// <random> distributions, so that a fixed seed yields the same stream on
// every platform and standard library.
using Rng = std::mt19937_64;

// Uniform integer in [0, n). Rejection sampling, no modulo bias.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n == 0) {
    throw InvalidArgument("uniform_below: n must be positive");
  }
  const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
  std::uint64_t draw = rng();
  while (draw > limit) {
    draw = rng();
  }
  return draw % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double canonical_double(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * canonical_double(rng);
}

// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::uint64_t j = uniform_below(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

// Index drawn with probability weights[i] / sum(weights).
// Weights must be non-negative with a positive sum.
inline std::size_t pick_weighted(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) {
      throw InvalidArgument("pick_weighted: negative weight");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw InvalidArgument("pick_weighted: weights sum to zero");
  }
  const double u = canonical_double(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) {
      return i;
    }
  }
  return weights.size() - 1;
}

}  // namespace offset
