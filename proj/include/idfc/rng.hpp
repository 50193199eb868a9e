#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace idfc {

// Deterministic, platform-independent random machinery. The standard
// <random> distributions are implementation-defined, so everything that must
// reproduce bit-identically across platforms is hand-rolled on top of a
// splitmix64-seeded xoshiro256** core.

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Combines a base seed with a stream key so that independent substreams can
// be drawn per (day, product, purpose) in any order.
inline std::uint64_t seed_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = seed;
  std::uint64_t acc = splitmix64(s);
  for (std::uint64_t k : keys) {
    s = acc ^ (k + 0x9e3779b97f4a7c15ull);
    acc = splitmix64(s);
  }
  return acc;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Fixed-point multiply; bias is negligible for
  // the n used here and the result is platform-stable.
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via polar Box-Muller (deterministic given the stream).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  double exponential() { return -std::log(1.0 - uniform()); }

  // Knuth's method; fine for the arrival-count scale used here.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 1000.0) {
      // Normal approximation for very large means.
      const int k = static_cast<int>(std::lround(mean + std::sqrt(mean) * normal()));
      return k < 0 ? 0 : k;
    }
    const double limit = std::exp(-mean);
    double prod = 1.0;
    int n = 0;
    do {
      prod *= uniform();
      ++n;
    } while (prod > limit);
    return n - 1;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4] = {};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace idfc
