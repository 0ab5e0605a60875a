#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dcsgl {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for a tuple of keys, e.g. (seed, graph_id, gamma).
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed);
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

// Library-independent draws so generated data is identical across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer in [0, n).
inline int uniform_index(Rng& rng, int n) {
  return static_cast<int>((static_cast<unsigned __int128>(rng()) * static_cast<std::uint64_t>(n)) >> 64);
}

/// Uniform integer in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) { return lo + uniform_index(rng, hi - lo + 1); }

template <class It>
void shuffle(It first, It last, Rng& rng) {
  auto n = static_cast<int>(last - first);
  for (int i = n - 1; i > 0; --i) std::swap(first[i], first[uniform_index(rng, i + 1)]);
}

}  // namespace dcsgl
