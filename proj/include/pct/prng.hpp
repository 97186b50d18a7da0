#ifndef PCT_PRNG_HPP
#define PCT_PRNG_HPP

#include <array>
#include <cstdint>

#include "pct/rational.hpp"

namespace pct {

// splitmix64; used to expand a user seed into generator state and to
// derive independent per-replicate seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
  return splitmix64(s);
}

// xoshiro256** 1.0 (Blackman & Vigna, public domain). This is the pinned
// sampling generator: identical seeds give identical draw sequences on
// every platform. Category sampling goes through integer comparison
// against exact rational thresholds; no floating point is involved.
class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next() {
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

  // Uniform integer in [0, bound); bound >= 1. Exact via rejection on the
  // smallest covering power of two. bound == 1 consumes no randomness.
  BigInt below(const BigInt& bound);

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace pct

#endif  // PCT_PRNG_HPP
