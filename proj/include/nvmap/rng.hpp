#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace nvmap {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream key for (seed, tag, i, j, ...). Every random consumer derives its own stream
// from the run seed and its logical index, never from scheduling order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix64(seed);
    for (auto p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Rng(derive_seed(seed, path));
}

// Stream tags.
enum StreamTag : std::uint64_t {
    kTagAnneal = 1,
    kTagBootstrap = 2,
    kTagPropagate = 3,
    kTagCluster = 4,
    kTagNoise = 5,
    kTagPairs = 6,
};

}  // namespace nvmap
