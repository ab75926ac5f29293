#pragma once

#include <cstdint>
#include <random>

namespace riskbounds {

/// Replication substreams.
///
/// Every draw in the library comes from std::mt19937_64 seeded through
/// std::seed_seq with the four 32-bit words of (seed, stream). Both the engine
/// and the seed_seq mixing are fully specified by the C++ standard, so a given
/// (seed, stream) yields the same bit sequence on every conforming platform.
/// Stream r is the r-th Monte Carlo replication; stream 0 is the plain seed.
using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Engine(seq);
}

/// Uniform double in the open interval (0,1) from the top 53 bits of one draw.
/// std::uniform_real_distribution is not used: its output is implementation-defined.
inline double uniform_open01(Engine& engine) {
    const std::uint64_t bits = engine() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

} // namespace riskbounds
