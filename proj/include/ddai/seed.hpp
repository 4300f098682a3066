#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>

namespace ddai {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 42;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Seed for one named random stream. Every random draw in the pipeline comes
/// from `derive_seed(master, "<purpose>", index)`, e.g. ("shuffle", epoch).
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                                           std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : purpose) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return splitmix64(splitmix64(master ^ h) + index);
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform,
/// unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n) by rejection sampling.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

/// Fisher-Yates with `uniform_below`, reproducible across standard libraries.
template <class It>
void seeded_shuffle(It first, It last, Rng& rng) {
    auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        auto j = uniform_below(rng, i);
        std::iter_swap(first + (i - 1), first + j);
    }
}

}  // namespace ddai
