#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <boost/random/uniform_int_distribution.hpp>

namespace cglasso {

/// Engine used for every seeded draw. std::mt19937_64 has a fully specified
/// output sequence; distributions come from Boost.Random so that draws are
/// identical across standard-library implementations.
using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed and a stream id.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Fisher-Yates shuffle with a portable index distribution.
template <typename T>
void portable_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(v[i - 1], v[pick(rng)]);
    }
}

}  // namespace cglasso
