#pragma once

#include <cstdint>
#include <cmath>

namespace pqoslat {

/// Deterministic 64-bit generator (xoshiro256++) with derivable substreams.
///
/// All randomness in the library flows through this type so that identical
/// seeds give bit-identical streams on every platform. Substreams for
/// concurrent tasks are derived as (seed, stream index) pairs; derived
/// streams are statistically independent of the parent.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        // SplitMix64 seeding, as recommended for the xoshiro family.
        std::uint64_t x = seed;
        for (auto& word : state_) {
            word = splitmix64(x);
        }
    }

    /// Stream for task `stream` under master seed `seed`.
    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = seed;
        std::uint64_t a = splitmix64(x);
        std::uint64_t y = stream ^ 0x9e3779b97f4a7c15ULL;
        std::uint64_t b = splitmix64(y);
        return Rng(a ^ (b * 0xff51afd7ed558ccdULL) ^ (stream + 1));
    }

    /// Child stream derived from this generator's seed material.
    Rng derive(std::uint64_t stream) const {
        return substream(state_[0] ^ state_[2], stream);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // Lemire's multiply-shift rejection-free map is fine here; the tiny
        // modulo bias at n << 2^64 is irrelevant for simulation use.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) {
        return uniform() < p;
    }

    /// Inverse-transform exponential draw with the given rate (events per ms).
    double exponential(double rate) {
        // uniform() < 1 always, so the log argument stays positive.
        return -std::log1p(-uniform()) / rate;
    }

    /// Standard normal via Box-Muller (no cached spare, two uniforms per draw).
    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

    /// Gamma(shape k, scale theta) for integer-ish small k via Marsaglia-Tsang.
    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t state_[4];
};

} // namespace pqoslat
