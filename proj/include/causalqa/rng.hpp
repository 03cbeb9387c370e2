#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace causalqa {

using Rng = std::mt19937_64;

// Seed split rule: child = splitmix64(parent ^ fnv1a(tag) ^ splitmix64(index)).
// Every stage and every case derives its own stream from the root seed this
// way, so generation order never changes what a given case sees.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t index = 0) {
    return splitmix64(parent ^ fnv1a(tag) ^ splitmix64(index));
}

inline Rng make_rng(std::uint64_t parent, std::string_view tag, std::uint64_t index = 0) {
    return Rng(derive_seed(parent, tag, index));
}

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Uniform magnitude in [lo, hi] with a random sign.
inline double signed_uniform(Rng& rng, double lo, double hi) {
    const double m = uniform(rng, lo, hi);
    return std::bernoulli_distribution(0.5)(rng) ? m : -m;
}

}  // namespace causalqa
