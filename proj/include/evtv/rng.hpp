#pragma once

// Seedable random streams.
//
// Two flavours are provided:
//
//  * Counter-based draws: uniform01(seed, stream, index) hashes the triple
//    through SplitMix64. Cohort generation uses one stream per variable and
//    the subject index as counter, so adding a variable never perturbs the
//    draws of an existing one.
//
//  * Xoshiro256** engines for sequential use (bootstrap resampling), each
//    seeded from derive_seed(seed, stream, index) so that replicate k always
//    sees the same stream regardless of scheduling.
//
// Nothing here depends on std:: distributions, whose output is
// implementation-defined, so draws are bit-identical across platforms.

#include <array>
#include <cstdint>
#include <limits>

namespace evtv::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                           std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + index);
}

// 53 random mantissa bits -> [0, 1).
inline constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline constexpr double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return to_unit(derive_seed(seed, stream, index));
}

// Stream tags. Values are part of the reproducibility contract; never reuse
// or renumber them.
namespace stream {
inline constexpr std::uint64_t kU0 = 1;
inline constexpr std::uint64_t kL0 = 2;
inline constexpr std::uint64_t kA0 = 3;
inline constexpr std::uint64_t kU1 = 4;
inline constexpr std::uint64_t kL1 = 5;
inline constexpr std::uint64_t kA1 = 6;
inline constexpr std::uint64_t kY00 = 7;
inline constexpr std::uint64_t kY01 = 8;
inline constexpr std::uint64_t kY10 = 9;
inline constexpr std::uint64_t kY11 = 10;
inline constexpr std::uint64_t kBootstrap = 100;
inline constexpr std::uint64_t kReplication = 200;
}  // namespace stream

class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) {
    for (auto& word : state_) {
      seed += 0x9E3779B97F4A7C15ULL;
      word = splitmix64(seed);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  double uniform() { return to_unit((*this)()); }

  // Unbiased integer in [0, bound) (Lemire's multiply-and-reject).
  std::uint64_t below(std::uint64_t bound) {
    __extension__ using u128 = unsigned __int128;
    u128 m = static_cast<u128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<u128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace evtv::rng
