#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace saferl::rng {

// splitmix64 step; used both as a mixer and as the seed expander for
// mt19937_64 (its recommended seeding procedure).
inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives a named sub-stream key from a master seed. Streams with distinct
// (tag, a, b) are independent for all practical purposes, so components can
// be re-ordered without disturbing each other's draws.
inline std::uint64_t substream_key(std::uint64_t seed, std::string_view tag,
                                   std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t x = seed;
  std::uint64_t k = splitmix64(x) ^ fnv1a(tag);
  k = splitmix64(k) ^ a;
  k = splitmix64(k) ^ b;
  return splitmix64(k);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::string_view tag,
                                   std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t key = substream_key(seed, tag, a, b);
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(splitmix64(key)),
                    static_cast<std::uint32_t>(splitmix64(key))};
  return std::mt19937_64(seq);
}

// Uniform on [0,1) with 53 random bits. All sampling in this library goes
// through these helpers rather than std:: distributions, which keeps runs
// bit-identical for a given seed regardless of standard library.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform on (0,1]; safe to pass to log().
inline double uniform01_open_low(std::mt19937_64& g) {
  return (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

// Standard normal via Box-Muller (stateless; two uniforms per draw).
inline double normal(std::mt19937_64& g) {
  const double u1 = uniform01_open_low(g);
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Index draw from an unnormalized nonnegative weight range.
template <typename Range>
std::size_t discrete(std::mt19937_64& g, const Range& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform01(g) * total;
  std::size_t i = 0;
  std::size_t n = static_cast<std::size_t>(weights.size());
  for (; i + 1 < n; ++i) {
    u -= weights[i];
    if (u < 0.0) break;
  }
  return i;
}

}  // namespace saferl::rng
