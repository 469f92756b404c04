#pragma once

#include <cstdint>
#include <random>

namespace agentgate {

using Rng = std::mt19937_64;

// splitmix64 finalizer. Used to derive statistically independent sub-seeds
// from (seed, index) pairs so per-sample generators can be created in any
// order (or in parallel) and still reproduce the same stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_subseed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index * 0x9e3779b97f4a7c15ULL + 1));
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace agentgate
