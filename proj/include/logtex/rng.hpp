#pragma once

#include <cstdint>
#include <string_view>

namespace logtex {

// splitmix64: fixed, platform-independent stream. Used everywhere a seeded
// decision is made so that results are reproducible bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [-limit, limit).
  double next_uniform(double limit) { return (2.0 * next_double() - 1.0) * limit; }

 private:
  std::uint64_t state_;
};

// Derives a per-module seed from the run-level seed, so one RunConfig seed
// fans out to independent deterministic streams.
std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view role);

}  // namespace logtex
