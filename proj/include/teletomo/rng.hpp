// rng.hpp
// Deterministic random streams built on SplitMix64. Streams derived from
// (seed, salt...) are independent of evaluation order, which is what makes
// sampled runs reproducible shot by shot.

#pragma once

#include <complex>
#include <cstdint>

namespace teletomo::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derives a decorrelated child key from a key and a salt.
inline std::uint64_t derive(std::uint64_t key, std::uint64_t salt) {
    std::uint64_t s = key ^ (0xD1B54A32D192ED03ull * (salt + 1));
    return splitmix64(s);
}

class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard complex Gaussian via Box-Muller (Re, Im ~ N(0,1)).
    std::complex<double> complex_gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * 3.14159265358979323846 * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

private:
    std::uint64_t state_;
};

}  // namespace teletomo::rng
