#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>

namespace starris {

using Rng = std::mt19937_64;

// Distributions are constructed per draw so that the engine state alone
// determines every subsequent sample (checkpoints only need the engine).
inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng);
}

// Circularly-symmetric CN(0, 1): real and imaginary parts N(0, 1/2).
inline std::complex<double> complex_normal(Rng& rng) {
  constexpr double kHalfStd = 0.70710678118654752440;
  const double re = standard_normal(rng) * kHalfStd;
  const double im = standard_normal(rng) * kHalfStd;
  return {re, im};
}

// SplitMix64 finalizer; used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix_seed(mix_seed(base) ^ (stream * 0xd6e8feb86659fd93ULL));
}

std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& text);

}  // namespace starris
