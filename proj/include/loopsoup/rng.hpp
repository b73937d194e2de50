#pragma once

// Deterministic, portable random streams.
//
// Generator: xoshiro256++ seeded through SplitMix64 from a (seed, stream)
// pair. Identical (seed, stream) reproduces identical output bit for bit on
// every platform, which the experiment runner relies on: workers own disjoint
// streams derived by hashing (experiment name, replicate index), and any
// per-loop substream is derived from the parent stream plus a tag so that
// lazily-consumed draws never perturb later samples.

#include <cmath>
#include <cstdint>
#include <string_view>

#include "loopsoup/geom.hpp"

namespace loopsoup {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64(s);
}

// FNV-1a, used to derive stream ids from experiment names.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::uint64_t sm = seed ^ 0x6A09E667F3BCC909ULL;
    sm ^= mix64(stream ^ 0xBB67AE8584CAA73BULL);
    for (auto& w : s_) w = splitmix64(sm);
    // xoshiro must not start in the all-zero state.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9E3779B97F4A7C15ULL;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Child stream for a tagged purpose (per-loop refinement, workers, ...).
  Rng derive(std::uint64_t tag) const {
    return Rng(seed_, mix64(stream_ ^ mix64(tag ^ 0x452821E638D01377ULL)));
  }
  Rng derive(std::string_view name, std::uint64_t index) const {
    return derive(fnv1a(name) ^ mix64(index));
  }

  std::uint64_t u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on (0,1): 53-bit mantissa, never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Marsaglia polar method with a cached spare; branchy but portable.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  Vec3 normal3() {
    const double a = normal(), b = normal(), c = normal();
    return {a, b, c};
  }

  double exponential() { return -std::log(uniform()); }

  Vec3 uniform_in(const Box3& box) {
    return {uniform(box.lo.x, box.hi.x), uniform(box.lo.y, box.hi.y),
            uniform(box.lo.z, box.hi.z)};
  }

  // Uniform point in the ball of given radius (rejection from the cube).
  Vec3 uniform_in_ball(double radius) {
    for (;;) {
      const Vec3 p{uniform(-radius, radius), uniform(-radius, radius),
                   uniform(-radius, radius)};
      if (p.norm2() <= radius * radius) return p;
    }
  }

  // Uniform point on the sphere of given radius.
  Vec3 uniform_sphere(double radius = 1.0) {
    Vec3 g;
    double n;
    do {
      g = normal3();
      n = g.norm();
    } while (n < 1e-12);
    return g * (radius / n);
  }

  // Poisson draw. Inversion by multiplication for small means, PTRS
  // (Hörmann 1993) transformed rejection for large ones.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      const double limit = std::exp(-mean);
      double prod = 1.0;
      std::uint64_t n = 0;
      for (;;) {
        prod *= uniform();
        if (prod <= limit) return n;
        ++n;
      }
    }
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::abs(u);
      const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          k * loglam - mean - std::lgamma(k + 1.0)) {
        return static_cast<std::uint64_t>(k);
      }
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace loopsoup
