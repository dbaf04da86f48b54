#pragma once

#include <cstdint>
#include <random>

namespace memnav {

// Seeded random stream. Wraps mt19937_64 but converts to doubles ourselves so
// that draws are bit-reproducible regardless of standard library internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double canonical() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be positive. Uses rejection sampling so
  // the distribution is exact.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return draw % n;
  }

  // Derive an independent stream seed from a base seed and stream labels.
  // SplitMix64 finalizer applied over the mixed words; cheap and well spread.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    auto mix = [](std::uint64_t z) {
      z += 0x9e3779b97f4a7c15ULL;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ a) ^ b);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace memnav
