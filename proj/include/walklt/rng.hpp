// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>

namespace walklt {

// Finalizer from splitmix64; bijective on uint64.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream-seed derivation: mix64 is a bijection, so for a fixed master seed
// distinct replicate indices can never collide.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ index);
}

// xoshiro256++ (Blackman & Vigna), seeded through splitmix64 expansion.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t z = seed;
    for (auto& w : s_) {
      z += 0x9e3779b97f4a7c15ULL;
      std::uint64_t t = z;
      t = (t ^ (t >> 30)) * 0xbf58476d1ce4e5b9ULL;
      t = (t ^ (t >> 27)) * 0x94d049bb133111ebULL;
      w = t ^ (t >> 31);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = std::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

  // uniform on [0,1) with 53 random bits
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1); never returns 0, safe under log()
  double next_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  // geometric on {0,1,2,...} with P(k) = 2^-(k+1): index of first zero bit
  std::uint32_t next_geometric_half() {
    std::uint32_t total = 0;
    for (;;) {
      std::uint64_t w = next_u64();
      const int ones = std::countr_one(w);
      total += static_cast<std::uint32_t>(ones);
      if (ones < 64) return total;
    }
  }

 private:
  std::uint64_t s_[4];
};

// Caches one 64-bit word and hands out single fair bits; the workhorse of
// the +/-1 walk inner loops.
class BitStream {
 public:
  explicit BitStream(Rng& rng) : rng_(&rng) {}

  bool next_bit() {
    if (left_ == 0) {
      word_ = rng_->next_u64();
      left_ = 64;
    }
    const bool b = word_ & 1u;
    word_ >>= 1;
    --left_;
    return b;
  }

 private:
  Rng* rng_;
  std::uint64_t word_ = 0;
  int left_ = 0;
};

}  // namespace walklt
