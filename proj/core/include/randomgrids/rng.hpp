#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace rgrids {

// splitmix64 step (Vigna's fixed-increment SplittableRandom core). Used both
// as a mixer for deriving independent streams from (seed, term, sample)
// coordinates and to expand a single seed into generator state.
inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256++ with hand-rolled distributions. The standard library's
// normal/poisson distributions are implementation-defined, which would make
// results differ across toolchains; everything here is pinned down so a seed
// means the same run everywhere. Each Monte Carlo sample owns one stream,
// derived from (master seed, term index, sample index), so the schedule of
// workers cannot change what any sample draws.
class RngStream {
 public:
  RngStream() : RngStream(0, 0, 0) {}

  RngStream(uint64_t master_seed, uint64_t term, uint64_t sample) {
    uint64_t h = master_seed;
    splitmix64_next(h);
    h ^= 0x9E3779B97F4A7C15ULL * (term + 1);
    splitmix64_next(h);
    h ^= 0xC2B2AE3D27D4EB4FULL * (sample + 1);
    for (auto& w : s_) w = splitmix64_next(h);
  }

  uint64_t next() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1), 53-bit mantissa.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., bound-1}, unbiased via rejection.
  uint64_t uniform_below(uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be > 0");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  // Standard normal via Box-Muller (cosine branch only: exactly two uniforms
  // per draw, which keeps the draw count of every code path deterministic).
  double normal() {
    double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Poisson by inversion of the exponential product (Knuth). Means here are
  // O(1) (jump intensities over one step), where this is fastest and exact.
  int poisson(double mean) {
    if (mean < 0) throw std::invalid_argument("poisson: negative mean");
    if (mean == 0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
};

}  // namespace rgrids
