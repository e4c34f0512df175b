#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fockforge {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stream seed for (master, tags...). Each task owns one stream, so results
/// do not depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    return Rng(derive_seed(master, tags));
}

/// Stream tags.
namespace stream {
inline constexpr std::uint64_t kSingleLayer = 1;
inline constexpr std::uint64_t kTransfer = 2;
inline constexpr std::uint64_t kOffspring = 3;
inline constexpr std::uint64_t kNoise = 4;
}  // namespace stream

}  // namespace fockforge
