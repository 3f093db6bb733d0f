#pragma once
// Draws from mt19937_64 that do not depend on the standard library's
// distribution implementations, so a seed reproduces everywhere.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace kgdedup {

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t limit = kMax - kMax % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(std::mt19937_64& rng, double p) { return uniform01(rng) < p; }

}  // namespace kgdedup
