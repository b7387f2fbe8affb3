#pragma once

#include <cstdint>

namespace sprmab {

// Counter-based random streams. A draw is a pure function of its key, so
// episodes can run in any order (or in parallel) and still reproduce exactly.

constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
    std::uint64_t k = mix64(seed ^ 0x5851f42d4c957f2dULL);
    k = mix64(k ^ a);
    k = mix64(k ^ (b * 0x2545f4914f6cdd1dULL));
    k = mix64(k ^ (c * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
    return k;
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

constexpr double uniform_at(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0) {
    return to_unit(stream_key(seed, a, b, c));
}

// Stream tags keep distinct consumers of the same episode seed apart.
inline constexpr std::uint64_t kTagTransition = 0x7472616e73ULL;
inline constexpr std::uint64_t kTagInitial = 0x696e6974ULL;
inline constexpr std::uint64_t kTagPolicy = 0x706f6c6963ULL;

}  // namespace sprmab
