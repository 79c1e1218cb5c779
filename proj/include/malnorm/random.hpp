#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace malnorm {

/// Philox4x32-10 block function (Salmon et al.): maps a 128-bit counter and a
/// 64-bit key to 128 pseudo-random bits.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

/// A reproducible random stream addressed by (base seed, stream index). Draws
/// are a pure function of (base seed, index, draw counter), so any sample can
/// be regenerated independently of evaluation order or thread schedule.
class SeededStream {
 public:
  SeededStream(std::uint64_t base_seed, std::uint64_t index)
      : seed_(base_seed), index_(index) {}

  std::uint64_t base_seed() const noexcept { return seed_; }
  std::uint64_t index() const noexcept { return index_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Two 64-bit words from one Philox block.
  std::pair<std::uint64_t, std::uint64_t> next_block() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    ++counter_;
    const auto r = philox4x32(ctr, key);
    return {(static_cast<std::uint64_t>(r[1]) << 32) | r[0],
            (static_cast<std::uint64_t>(r[3]) << 32) | r[2]};
  }

  /// Uniform double in the open interval (0, 1).
  static double to_unit_open(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_uniform() { return to_unit_open(next_block().first); }

  /// Two independent standard normals (Box-Muller on one block).
  std::pair<double, double> next_normal_pair() {
    const auto [a, b] = next_block();
    const double u1 = to_unit_open(a);
    const double u2 = to_unit_open(b);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  std::uint64_t seed_;
  std::uint64_t index_;
  std::uint64_t counter_ = 0;
};

}  // namespace malnorm
