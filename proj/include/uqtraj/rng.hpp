#pragma once

#include <cstdint>
#include <random>

namespace uqtraj {

// splitmix64 step; used to derive independent per-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// seed for the i-th independent stream of a root seed
inline std::uint64_t substream_seed(std::uint64_t root, std::uint64_t index) {
    std::uint64_t s = root;
    std::uint64_t out = 0;
    for (std::uint64_t i = 0; i <= index % 4; ++i) out = splitmix64(s);
    s = root ^ (0x632be59bd9b4e019ULL * (index + 1));
    return splitmix64(s) ^ out;
}

using Rng = std::mt19937_64;

// fresh distribution per call so reseeding the engine fully resets the stream
inline double gauss(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
}

}  // namespace uqtraj
