#include "varioeta/rng.hpp"

namespace varioeta {

namespace {
__extension__ typedef unsigned __int128 u128;
}  // namespace

std::uint64_t RngStream::next_below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = next_u64();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double mean_of_uniforms(std::uint64_t key, std::uint64_t count) noexcept {
  // Blocks of 1024 keep the inner 64-bit sum below 2^63 and vectorizable.
  constexpr std::uint64_t kBlock = 1024;
  u128 total = 0;
  std::uint64_t k = 0;
  while (k < count) {
    const std::uint64_t end = (count - k > kBlock) ? k + kBlock : count;
    std::uint64_t block_sum = 0;
    for (std::uint64_t j = k; j < end; ++j) {
      block_sum += mix64(key + (j + 1) * kGoldenGamma) >> 11;
    }
    total += block_sum;
    k = end;
  }
  return static_cast<double>(total) * 0x1.0p-53 / static_cast<double>(count);
}

}  // namespace varioeta
