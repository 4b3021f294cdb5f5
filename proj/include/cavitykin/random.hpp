#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cavitykin {

// Seed derivation and variate generation are written out explicitly instead
// of using std::*_distribution, whose output is implementation-defined. This
// keeps seeded runs byte-reproducible across standard libraries.

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  auto splitmix = [](std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t state = a;
  std::uint64_t h = splitmix(state);
  state ^= b + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix(state);
  state ^= c + 0xbf58476d1ce4e5b9ULL;
  h ^= splitmix(state);
  return h;
}

inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

inline double normal01(std::mt19937_64& gen) {
  double u1 = uniform01(gen);
  while (u1 <= 0.0) u1 = uniform01(gen);
  const double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace cavitykin
