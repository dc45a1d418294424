#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace kgood {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; a bijective mixer over 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream split: (master, stream, substream) -> independent seed.
// Results never depend on the order in which streams are requested.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t substream = 0) noexcept {
  return mix64(mix64(mix64(master) ^ stream) ^ (substream * 0xd1b54a32d192ed03ULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream, std::uint64_t substream = 0) {
  return Rng(derive_seed(master, stream, substream));
}

// Uniform double in [0, 1) from the top 53 bits; avoids distribution
// implementation differences between standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Unbiased index in [0, n), n > 0. Rejects the 2^64 mod n lowest words.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t v = rng();
  while (v < threshold) v = rng();
  return v % n;
}

// Standard normal via Box-Muller on uniform01.
inline double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace kgood
