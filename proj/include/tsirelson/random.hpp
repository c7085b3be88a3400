#pragma once

// Counter-based random streams.
//
// Philox4x32-10 (Salmon et al., SC'11) maps a 128-bit counter and a 64-bit key
// to 128 random bits with no hidden state. A Stream is addressed by
// (seed, sample, lane): the seed is the key, the sample index and the lane fill
// three counter words, and the fourth word counts blocks drawn within the
// stream. Any two distinct addresses give independent streams, so a draw for
// sample i at time index k is the same regardless of how samples are split
// across workers or how deep a simulation reaches.

#include <array>
#include <cstdint>

namespace tsirelson {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// One Philox4x32 evaluation with 10 rounds.
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t sample, std::uint32_t lane);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open_zero() { return 1.0 - uniform(); }
  // Standard normal via Box-Muller; the second variate is cached.
  double normal();

 private:
  void refill();

  PhiloxKey key_;
  PhiloxCounter counter_;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Reserved lanes. Time index k <= 0 uses lane noise_lane(k).
namespace lanes {
inline constexpr std::uint32_t kAnchor = 0;
inline constexpr std::uint32_t kMixture = 0xFFFFFFFFu;
inline constexpr std::uint32_t noise(std::int64_t k) { return static_cast<std::uint32_t>(1 - k); }
}  // namespace lanes

// SplitMix64 finalizer; used to derive independent seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace tsirelson
