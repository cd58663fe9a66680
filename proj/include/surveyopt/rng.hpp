#pragma once

#include <cstdint>
#include <random>

namespace surveyopt {

// splitmix64 mixing step. Used to turn (master seed, counter) pairs into
// well-separated engine seeds so parallel replications never share a stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL));
}

using Rng = std::mt19937_64;

// Independent, reproducible stream for unit `index` of a run seeded with
// `master`. Identical (master, index) pairs give identical streams on every
// thread layout, which is what makes threaded runs byte-reproducible.
inline Rng make_rng(std::uint64_t master, std::uint64_t index = 0) {
    return Rng(derive_seed(master, index));
}

}  // namespace surveyopt
