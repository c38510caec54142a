#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

// Deterministic randomness helpers. std::mt19937_64 output is pinned by the
// standard, and all value transforms below are hand-rolled, so identical
// seeds give identical streams on every platform and standard library.

namespace woc {

using Rng = std::mt19937_64;

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    return splitmix64(seed ^ splitmix64(salt));
}

constexpr std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt) {
    return mix_seed(seed, fnv1a(salt));
}

// Uniform double in [0, 1), 53 bits of mantissa.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, k), k >= 1. Rejection sampling on the raw stream.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t k) {
    if (k <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % k;
}

// Standard normal draw via Box-Muller. Always consumes exactly two uniforms
// and never caches a spare, so the stream position stays predictable.
inline double normal01(Rng& rng) {
    const double u1 = 1.0 - uniform01(rng); // (0, 1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace woc
