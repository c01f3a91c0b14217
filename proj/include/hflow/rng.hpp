#pragma once

#include <cstdint>

namespace hflow {

// splitmix64; self-contained so seeded streams are identical everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : s_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
  }

  // Uniform in [-1, 1).
  double next_sym() { return 2.0 * next_unit() - 1.0; }

 private:
  std::uint64_t s_;
};

}  // namespace hflow
