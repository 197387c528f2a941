// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pinchopt::rng {

// Counter-based uniform randomness built on the SplitMix64 finalizer.
// Every draw is a pure function of (stream, counter): no generator state,
// bit-identical on every platform, and safe to evaluate in any order.
// std::mt19937 + <random> distributions were rejected on purpose; the
// standard leaves distribution algorithms implementation-defined.

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

// Unrelated uses of one scenario seed get separated streams so that e.g.
// adding Monte Carlo draws never perturbs user positions.
enum class Stream : std::uint64_t {
  kUserPositions = 1,
  kBlockage = 2,
  kRestarts = 3,
  kValidation = 4,
  kInstances = 5,
};

constexpr std::uint64_t substream(std::uint64_t seed, Stream s) noexcept {
  return mix(seed + kGolden * static_cast<std::uint64_t>(s));
}

constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) noexcept {
  return mix(stream + kGolden * (counter + 1));
}

// Uniform on [0, 1) with 53-bit resolution.
constexpr double uniform01(std::uint64_t stream, std::uint64_t counter) noexcept {
  return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1]; usable as a log() argument.
constexpr double uniform01_open(std::uint64_t stream, std::uint64_t counter) noexcept {
  return static_cast<double>((bits(stream, counter) >> 11) + 1) * 0x1.0p-53;
}

// Standard normal via Box-Muller; consumes counters 2c and 2c+1.
inline double normal(std::uint64_t stream, std::uint64_t counter) noexcept {
  const double u1 = uniform01_open(stream, 2 * counter);
  const double u2 = uniform01(stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace pinchopt::rng
