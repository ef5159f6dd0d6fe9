#pragma once

#include <cstdint>
#include <random>

namespace subgauss {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic uniform stream. mt19937_64 output is pinned by the
/// standard and doubles are derived from raw bits, so identical seeds
/// give identical streams on every platform. Per-task substreams come
/// from splitmix64(seed ^ index).
class Rng {
public:
  explicit Rng(uint64_t seed) : eng_(splitmix64(seed)) {}
  static Rng stream(uint64_t seed, uint64_t index) {
    return Rng(splitmix64(seed) ^ splitmix64(index + 0x517cc1b727220a95ULL));
  }

  double uniform() {  // in [0,1)
    return (eng_() >> 11) * 0x1.0p-53;
  }
  double uniform_pos() {  // in (0,1]
    return ((eng_() >> 11) + 1.0) * 0x1.0p-53;
  }
  uint64_t uniform_int(uint64_t n) {  // in [0,n)
    return eng_() % n;
  }

private:
  std::mt19937_64 eng_;
};

}  // namespace subgauss
