#pragma once

// Seeded random numbers for every stochastic part of the library.
//
// The generator is SplitMix64 used in counter mode. A stream is identified by
// a 64-bit key; its k-th output (k = 0, 1, ...) is
//
//   mix64(key + (k + 1) * 0x9e3779b97f4a7c15)        (mod 2^64)
//
// where mix64 is the SplitMix64 finalizer:
//
//   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//   z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//   z =  z ^ (z >> 31)
//
// Keys are derived hierarchically with derive_key(parent, id) =
// mix64(parent ^ mix64(id + 0x9e3779b97f4a7c15)). A uniform double in [0, 1)
// is (x >> 11) * 2^-53.

#include <cstdint>
#include <span>

namespace varioeta {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t id) noexcept {
  return mix64(parent ^ mix64(id + kGoldenGamma));
}

constexpr double to_unit_interval(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id), key_(derive_key(seed, stream_id)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGoldenGamma);
  }

  /// Uniform on [0, 1) with 53 random mantissa bits.
  double next_uniform() noexcept { return to_unit_interval(next_u64()); }

  /// Uniform on [-1, 1).
  double next_symmetric() noexcept { return 2.0 * next_uniform() - 1.0; }

  /// Unbiased integer in [0, bound). bound must be positive.
  std::uint64_t next_below(std::uint64_t bound) noexcept;

  /// Fisher-Yates shuffle driven by next_below.
  template <typename T>
  void shuffle(std::span<T> values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(next_below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Mean of the first `count` uniforms of the stream with the given key.
///
/// The 53-bit integer mantissas are summed exactly and the sum is rounded
/// once, so the result does not depend on summation order. count must be
/// positive.
double mean_of_uniforms(std::uint64_t key, std::uint64_t count) noexcept;

}  // namespace varioeta
