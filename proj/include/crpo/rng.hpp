#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace crpo {

// splitmix64 finalizer; used to derive independent stream seeds from
// (run seed, step, prompt id) so batch results are order-independent.
inline uint64_t mix_bits(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  return mix_bits(mix_bits(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

// Deterministic uniform stream. std::mt19937_64 output is fully specified
// by the standard; we avoid std::*_distribution (implementation-defined)
// so runs are bit-reproducible across toolchains.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1) with 53 random bits
  double next_uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

// Inverse-CDF draw from a normalized probability vector.
inline int sample_categorical(std::span<const double> probs, double u) {
  double cum = 0.0;
  const int n = static_cast<int>(probs.size());
  for (int i = 0; i < n; ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return n - 1;  // guard against rounding at the tail
}

}  // namespace crpo
