#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace zcmsep {

// SplitMix64 finalizer (Vigna). Used to turn structured indices into
// well-mixed engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Seed of sub-stream `stream` of `master`:
//   derive_seed(master, k) = splitmix64(master ^ splitmix64(k + 1)).
// This is the documented pure function behind all per-trial and per-start
// randomness; no mutable random state is ever shared between streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(master ^ splitmix64(stream + 1));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(seed); }

// Uniform in [0, 1) from the top 53 bits; independent of library
// distribution internals so streams are identical across toolchains.
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_double(rng);
}

// Circularly symmetric complex Gaussian with E|z|^2 = 1 (polar Box-Muller;
// consumes exactly two engine words per draw).
template <class T = double>
std::complex<T> complex_gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - unit_double(rng);  // (0, 1]
  const double theta = 2.0 * std::numbers::pi * unit_double(rng);
  const double r = std::sqrt(-std::log(u1));
  return {static_cast<T>(r * std::cos(theta)), static_cast<T>(r * std::sin(theta))};
}

}  // namespace zcmsep
