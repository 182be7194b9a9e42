#pragma once

#include <cstdint>
#include <initializer_list>

#include "qdsim/numerics.hpp"

namespace qdsim::rng {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based draw: a hash of (seed, stream words). Draws are addressed,
// not sequential, so adding streams never reshuffles existing ones.
inline std::uint64_t hash_u64(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = mix64(seed);
    for (std::uint64_t w : words) h = mix64(h ^ w);
    return h;
}

// Uniform in the open interval (0,1); never returns 0 or 1.
inline double to_unit(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
    return to_unit(hash_u64(seed, words));
}

inline double standard_normal(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
    return num::normal_quantile(to_unit(hash_u64(seed, words)));
}

// Stream tags for the draws of one synthesized sample / measurement.
enum Tag : std::uint64_t {
    kVtPlunger = 1,
    kVtBarrier = 2,
    kOutlierPlunger = 3,
    kOutlierBarrier = 4,
    kCp = 5,
    kAlpha = 6,
    kGmax = 7,
    kSpuriousPresent = 8,
    kSpuriousPeriod = 9,
    kSpuriousDepth = 10,
    kSpuriousLever = 11,
    kNoise = 12,
    kSampleSeed = 13,
    kRecordSeed = 14,
};

} // namespace qdsim::rng
