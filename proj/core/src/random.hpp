#pragma once

#include <cstdint>
#include <random>
#include <span>

// Portable draws on top of mt19937_64; the standard distributions are not
// reproducible across library implementations.

namespace mmr::detail {

inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

inline std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

template <class T, class Weight>
std::size_t pick_weighted(std::mt19937_64& rng, std::span<const T> items, Weight weight) {
  double total = 0.0;
  for (const T& item : items) total += weight(item);
  double r = unit(rng) * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double w = weight(items[i]);
    if (w <= 0.0) continue;
    last = i;
    if (r < w) return i;
    r -= w;
  }
  return last;
}

}  // namespace mmr::detail
