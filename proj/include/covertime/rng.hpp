#pragma once
// Seed derivation and uniform draws. Every trial gets its own generator
// derived from (master seed, index), so results do not depend on scheduling.

#include <cstdint>
#include <cmath>
#include <random>

namespace covertime {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

// [0,1) with 53 random bits.
inline double uniform01(Rng& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// (0,1), never 0.
inline double uniform_open(Rng& g) {
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

inline std::uint64_t uniform_index(Rng& g, std::uint64_t n) {
  // Lemire-free rejection keeps this identical across standard libraries.
  const std::uint64_t limit = n == 0 ? 0 : (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
  std::uint64_t v;
  do { v = g(); } while (v >= limit);
  return v % n;
}

// Number of failures before the first success, P(success) = p.
inline std::uint64_t geometric_failures(Rng& g, double p) {
  if (p >= 1.0) return 0;
  const double u = uniform_open(g);
  const double v = std::floor(std::log(u) / std::log1p(-p));
  if (!(v < 1.8e19)) return ~std::uint64_t{0};
  return static_cast<std::uint64_t>(v);
}

}  // namespace covertime
