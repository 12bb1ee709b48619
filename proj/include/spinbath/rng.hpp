// rng.hpp — Deterministic seeded random streams for pulse amplitudes and bath sampling

#pragma once

#include <cmath>
#include <cstdint>

namespace spinbath {

// SplitMix64 finishing function. Fully specified here so that seeded runs are
// bit-identical across standard-library versions.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform double in [0, 1) from 64 random bits.
inline double uniform01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Stateless per-index uniform draw: index n of the stream identified by seed.
inline double indexed_uniform01(std::uint64_t seed, std::uint64_t n) {
    return uniform01(mix64(seed ^ mix64(n + 1)));
}

class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double next_uniform01() { return uniform01(next()); }

  private:
    std::uint64_t state_;
};

// Standard-normal sampler (Box-Muller), deterministic for a given seed.
class GaussianSampler {
  public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 =
            (static_cast<double>(rng_.next() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = rng_.next_uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925287 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace spinbath
