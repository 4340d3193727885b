#pragma once

#include <cstdint>
#include <random>

namespace synth {

// splitmix64; used for seed derivation so that per-match / per-stream seeds
// are decorrelated even when callers pass small consecutive integers.
constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr uint64_t derive_seed(uint64_t base, uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x51ed270b0a1ce1a5ULL));
}

// Deterministic random source. mt19937_64 is fully specified by the standard;
// the bounded draw below avoids std::uniform_int_distribution, which is not.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform integer in [lo, hi], inclusive. Unbiased via rejection.
  int uniform_int(int lo, int hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % span);
    uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return lo + static_cast<int>(v % span);
  }

  // Uniform index in [0, n).
  int index(int n) { return uniform_int(0, n - 1); }

  // Uniform double in [0, 1).
  double uniform01() { return (engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace synth
