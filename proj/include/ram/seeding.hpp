#pragma once

#include <cstdint>

namespace ram {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent seed for (base, stream, index); streams keep env, policy and
/// network randomness from sharing draws.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) {
    return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

namespace seed_stream {
inline constexpr std::uint64_t world = 1;
inline constexpr std::uint64_t log_sessions = 2;
inline constexpr std::uint64_t calibration = 3;
inline constexpr std::uint64_t test_sessions = 4;
inline constexpr std::uint64_t policy = 5;
inline constexpr std::uint64_t rs_init = 6;
inline constexpr std::uint64_t as_init = 7;
inline constexpr std::uint64_t replay = 8;
}  // namespace seed_stream

}  // namespace ram
