#pragma once

#include <cstdint>
#include <random>

namespace nfdm {

using Rng = std::mt19937_64;

enum class StreamTag : std::uint64_t { symbols = 1, noise = 2, calibration = 3, sequences = 4 };

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream for (master seed, counter, purpose).
inline Rng make_stream(std::uint64_t master, std::uint64_t counter, StreamTag tag) {
    const std::uint64_t s = splitmix64(splitmix64(splitmix64(master) ^ counter) ^ static_cast<std::uint64_t>(tag));
    return Rng(s);
}

}  // namespace nfdm
