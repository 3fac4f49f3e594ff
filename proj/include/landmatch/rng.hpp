#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace landmatch {

/// SplitMix64, used to expand seeds into full generator states.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

/// xoshiro256** by Blackman/Vigna. Fixed bit-level behaviour on every
/// platform, so seeded runs are reproducible regardless of toolchain.
/// Independent streams are derived with `stream(seed, index)`, which is how
/// per-tree / per-land generators are split off one user seed.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& word : s_) word = sm.next();
    }

    /// Generator for substream `index` of `seed`; distinct indexes give
    /// statistically independent sequences.
    static Xoshiro256 stream(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 sm{seed ^ (0x9e3779b97f4a7c15ULL * (index + 1))};
        return Xoshiro256(sm.next());
    }

    std::uint64_t next() {
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

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    /// Standard normal draw; consumes exactly two uniforms (Box-Muller).
    double normal() {
        const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Sub-seed for substream `index`, for components that seed themselves.
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 sm{seed ^ (0x9e3779b97f4a7c15ULL * (index + 1))};
        return sm.next();
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

}  // namespace landmatch
