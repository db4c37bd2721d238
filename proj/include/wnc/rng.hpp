#pragma once

#include <cstdint>

// Counter-based random numbers: every value is a pure function of
// (seed, run, counter), so replicas can run in any order or thread.
namespace wnc::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t run) {
  return mix64(seed ^ mix64(run + kGolden));
}

constexpr std::uint64_t bits(std::uint64_t key, std::uint64_t counter) {
  return mix64(key + counter * kGolden);
}

/// Uniform in the open interval (0, 1): 53 random bits, offset by half an ulp.
constexpr double uniform(std::uint64_t key, std::uint64_t counter) {
  return (static_cast<double>(bits(key, counter) >> 11) + 0.5) * 0x1.0p-53;
}

/// Counter for lane `lane` (0..7) of slot `slot`.
constexpr std::uint64_t slot_counter(std::uint64_t slot, unsigned lane) {
  return slot * 8u + lane;
}

}  // namespace wnc::rng
