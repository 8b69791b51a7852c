// rng.hpp -- seedable, splittable counter-based pseudorandom generator.
//
// The generator is part of the reproducibility contract: a trace produced
// with a given seed must be bit-identical across platforms and builds.
// The algorithm is therefore fixed:
//
//   mix64(z):  z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//              z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
//              return z ^ (z >> 31)            (SplitMix64 finalizer)
//
//   key(seed, stream) = mix64(seed ^ (0x9E3779B97F4A7C15 * (stream + 1)))
//   output[i]         = mix64(key + i * 0x9E3779B97F4A7C15),  i = 1, 2, ...
//
// Independent substreams for seed-parallel trials come from split(), which
// re-keys with the parent key as the seed.

#pragma once

#include <cstdint>

namespace qerase {

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(seed ^ (kGamma * (stream + 1)))) {}

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Rejection sampling removes modulo bias;
  // for power-of-two bounds (the only bounds used by the simulator) the
  // rejection region is empty and exactly one draw is consumed.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t reject_below = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= reject_below) return r % bound;
    }
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Independent substream derived from this generator's key.
  CounterRng split(std::uint64_t stream) const { return CounterRng(key_, stream); }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qerase
