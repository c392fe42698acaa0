#pragma once

// Counter-based normal variates: Philox4x32-10 followed by Box-Muller.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace dk::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr const char* kScheme =
    "philox4x32-10+box-muller; counter=(step, particle, coordinate_pair, path); key=master_seed";

inline Counter philox4x32_10(Counter ctr, Key key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

inline Key key_from_seed(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Two independent standard normals from one Philox block.
inline std::array<double, 2> normal_pair(const Counter& ctr, const Key& key) {
  const Counter r = philox4x32_10(ctr, key);
  const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const double u1 = 1.0 - static_cast<double>(a >> 11) * kScale;  // (0, 1]
  const double u2 = static_cast<double>(b >> 11) * kScale;        // [0, 1)
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Standard normals for one (path, step, particle); out.size() is the dimension.
inline void standard_normals(const Key& key, std::uint32_t path, std::uint32_t step, std::uint32_t particle,
                             std::span<double> out) {
  for (std::size_t c = 0; c < out.size(); c += 2) {
    const auto z = normal_pair({step, particle, static_cast<std::uint32_t>(c / 2), path}, key);
    out[c] = z[0];
    if (c + 1 < out.size()) out[c + 1] = z[1];
  }
}

/// Sequential uniform stream for sampling test inputs: block b of stream s is
/// philox(counter = (b_lo, b_hi, s, 0xffffffff), key = seed).
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint32_t stream = 0) : key_(key_from_seed(seed)), stream_(stream) {}

  std::uint64_t next_u64() {
    if (used_ == 2) refill();
    const std::uint64_t v = (static_cast<std::uint64_t>(buffer_[2 * used_]) << 32) | buffer_[2 * used_ + 1];
    ++used_;
    return v;
  }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0); }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n; }

 private:
  void refill() {
    buffer_ = philox4x32_10({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), stream_,
                             0xffffffffu},
                            key_);
    ++block_;
    used_ = 0;
  }

  Key key_;
  std::uint32_t stream_;
  std::uint64_t block_ = 0;
  Counter buffer_{};
  int used_ = 2;
};

}  // namespace dk::rng
