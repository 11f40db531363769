#pragma once

#include <cstdint>
#include <initializer_list>

// Counter-based seeded randomness. Every random draw in the library flows
// through these primitives so that results depend only on explicit seeds,
// never on scheduling or worker count.

namespace fr {

// splitmix64 finalizer. Bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Seed derivation for parallel work items: fold the words into a running
// state, one bijective mixing step per word.
//
//   h0 = 0x9e3779b97f4a7c15
//   h  = mix64((h ^ w) + 0x9e3779b97f4a7c15)   for each word w
//
// The (h ^ w) + constant form avoids the finalizer's fixed point at zero.
// These constants are the contract; any reimplementation must match them
// bit for bit.
inline std::uint64_t hash64(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t w : words) {
    h = mix64((h ^ w) + 0x9e3779b97f4a7c15ULL);
  }
  return h;
}

// splitmix64 stream with Box-Muller Gaussian draws (one spare cached).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on [0, 1), 53 random bits.
  double uniform();

  // Standard normal N(0, 1).
  double gaussian();

  // Uniform integer in [0, n), rejection-sampled so it is exactly uniform.
  std::uint64_t uniform_below(std::uint64_t n);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fr
