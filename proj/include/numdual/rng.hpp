#pragma once

#include <cstdint>
#include <random>

#include "numdual/error.hpp"

namespace numdual {

// Deterministic random stream used by every randomized component.
//
// Raw 64-bit output comes from std::mt19937_64, which the standard pins down
// bit for bit.  All higher-level draws (unit doubles, bounded integers) are
// built here with explicit bit manipulation instead of the std::*_distribution
// adaptors, whose mappings are implementation-defined; this keeps generated
// instances and solver runs identical across compilers and platforms.
//
// Substreams are derived from (seed, tag) through a splitmix64-style mix, so
// each randomized array (capacities, routing matrix, utility coefficients, ...)
// consumes its own stream and adding draws to one never perturbs another.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t tag = 0)
      : gen_(mix(seed + 0x9e3779b97f4a7c15ULL * (tag + 1))) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double next_range(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  // Uniform integer in [0, n); rejection sampling avoids modulo bias.
  std::uint64_t next_index(std::uint64_t n) {
    if (n == 0) fail(Errc::kInvalidArgument, "next_index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  bool next_coin() { return (next_u64() >> 63) != 0; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
};

// Fixed substream tags.
inline constexpr std::uint64_t kStreamCapacities = 1;
inline constexpr std::uint64_t kStreamRouting = 2;
inline constexpr std::uint64_t kStreamRepair = 3;
inline constexpr std::uint64_t kStreamUtilities = 4;

}  // namespace numdual
