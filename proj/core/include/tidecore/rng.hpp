// Self-contained deterministic RNG (xoshiro256++ seeded through SplitMix64).
// Draw sequences depend only on the seed, never on the standard library, so
// identical seeds reproduce identical paths bit for bit across builds here.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "tidecore/domain.hpp"

namespace tidal {

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

class Rng {
  public:
    static Rng from_seed(std::uint64_t seed) {
        SplitMix64 mix(seed);
        Rng r;
        for (auto& word : r.s_) word = mix.next();
        if ((r.s_[0] | r.s_[1] | r.s_[2] | r.s_[3]) == 0) r.s_[0] = 1;
        return r;
    }

    // Documented per-path split: path k of master seed m is seeded from
    // SplitMix64(m XOR 0x9E3779B97F4A7C15 * (k+1)). Streams never overlap in
    // practice and each path owns its state exclusively.
    static std::uint64_t path_seed(std::uint64_t master, std::uint64_t path_index) {
        return SplitMix64(master ^ (0x9E3779B97F4A7C15ULL * (path_index + 1))).next();
    }

    static Rng for_path(std::uint64_t master, std::uint64_t path_index) {
        return from_seed(path_seed(master, path_index));
    }

    std::uint64_t next_u64() {
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

    /// Uniform on the open interval (0,1).
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller; consumes exactly two uniforms per pair.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        cached_ = mag * std::sin(ang);
        have_cached_ = true;
        return mag * std::cos(ang);
    }

    /// Poisson count by inversion; exact for the small means used per step.
    std::uint64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw ContractError("poisson: mean must be >= 0");
        std::uint64_t count = 0;
        // Chunk large means so exp(-mean) stays away from underflow.
        while (mean > 30.0) {
            count += poisson_small(30.0);
            mean -= 30.0;
        }
        return count + poisson_small(mean);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t poisson_small(double mean) {
        if (mean == 0.0) return 0;
        const double threshold = std::exp(-mean);
        std::uint64_t k = 0;
        double prod = uniform01();
        while (prod > threshold) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }

    std::array<std::uint64_t, 4> s_{1, 2, 3, 4};
    double cached_ = 0.0;
    bool have_cached_ = false;
};

inline ScalarModal random_modal(Rng& rng, int m1, int m2, double amplitude = 1.0) {
    ScalarModal c(m1, m2);
    for (double& x : c.c) x = amplitude * rng.normal();
    return c;
}

inline VectorModal random_vector_modal(Rng& rng, int m1, int m2, double amplitude = 1.0) {
    VectorModal c;
    c.c1 = random_modal(rng, m1, m2, amplitude);
    c.c2 = random_modal(rng, m1, m2, amplitude);
    return c;
}

}  // namespace tidal
