#pragma once

// Counter-based randomness. Every draw is a pure function of
// (seed, stream, index), so repeated passes and parallel workers observe the
// same values without sharing generator state.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pprobit::rng {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t stream,
                                   std::uint64_t index) noexcept {
  return mix64(mix64(mix64(seed) ^ stream) ^ (index * 0xd1b54a32d192ed03ULL));
}

/// Uniform in the open interval (0, 1).
inline constexpr double to_unit(std::uint64_t h) noexcept {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t index) noexcept {
  return to_unit(key(seed, stream, index));
}

/// Standard normal by Box-Muller over two keyed uniforms.
inline double normal(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t index) noexcept {
  const double u1 = to_unit(key(seed, stream, 2 * index));
  const double u2 = to_unit(key(seed, stream, 2 * index + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Stream tags. Values are arbitrary but frozen: changing one changes every
/// seeded output of the library.
enum Stream : std::uint64_t {
  kBucket = 0x11,
  kSign = 0x12,
  kExponential = 0x13,
  kJl = 0x21,
  kReservoir = 0x31,
  kReservoirMix = 0x32,
  kMerge = 0x33,
  kMuDirections = 0x41,
  kSynthDirection = 0x51,
  kSynthNoise = 0x52,
  kSynthShuffle = 0x53,
  kDistortion = 0x61,
  kTrial = 0x71,
};

/// Sequential generator over one keyed stream, for code that wants a cursor.
class Cursor {
 public:
  Cursor(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() noexcept { return key(seed_, stream_, counter_++); }
  double next_uniform() noexcept { return to_unit(next_u64()); }
  double next_normal() noexcept {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  /// Uniform integer in [0, bound) by multiply-shift.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace pprobit::rng
