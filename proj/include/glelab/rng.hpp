#pragma once

// Counter-based random numbers: Philox4x32-10 (Salmon, Moraes, Dror, Shaw,
// "Parallel random numbers: as easy as 1, 2, 3", SC'11).
//
// Every Gaussian increment is a pure function of (seed, batch, stream, step,
// component), so trajectories are reproducible independent of scheduling
// order and thread count. Streams separate the independent draw families of
// a batch (initial velocity, initial position, Brownian increments).

#include <array>
#include <cmath>
#include <cstdint>

namespace glelab {

namespace detail {

inline void philox_round(std::array<uint32_t, 4>& ctr, std::array<uint32_t, 2>& key) {
    constexpr uint64_t M0 = 0xD2511F53ull;
    constexpr uint64_t M1 = 0xCD9E8D57ull;
    const uint64_t p0 = M0 * ctr[0];
    const uint64_t p1 = M1 * ctr[2];
    const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
    const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += 0x9E3779B9u;  // golden ratio
    key[1] += 0xBB67AE85u;  // sqrt(3) - 1
}

}  // namespace detail

inline std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr,
                                          std::array<uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) detail::philox_round(ctr, key);
    return ctr;
}

enum class RngStream : uint32_t {
    InitVelocity = 0,
    InitPosition = 1,
    Brownian = 2,
    Generic = 3,
};

/// One standard normal draw for the given coordinates, via Box-Muller on the
/// four 32-bit Philox output lanes. Uniforms are 53-bit and offset away from
/// zero so the log is always finite.
inline double normal_draw(uint64_t seed, uint32_t batch, RngStream stream, uint32_t step,
                          uint32_t component) {
    const std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed),
                                         static_cast<uint32_t>(seed >> 32)};
    const std::array<uint32_t, 4> ctr = {batch, static_cast<uint32_t>(stream), step, component};
    const auto out = philox4x32(ctr, key);
    const uint64_t w1 = (static_cast<uint64_t>(out[0]) << 32) | out[1];
    const uint64_t w2 = (static_cast<uint64_t>(out[2]) << 32) | out[3];
    const double u1 = static_cast<double>(w1 >> 11) * 0x1.0p-53 + 0x1.0p-54;
    const double u2 = static_cast<double>(w2 >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Uniform in [0, 1) for the given coordinates.
inline double uniform_draw(uint64_t seed, uint32_t batch, RngStream stream, uint32_t step,
                           uint32_t component) {
    const std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed),
                                         static_cast<uint32_t>(seed >> 32)};
    const std::array<uint32_t, 4> ctr = {batch, static_cast<uint32_t>(stream), step, component};
    const auto out = philox4x32(ctr, key);
    const uint64_t w = (static_cast<uint64_t>(out[0]) << 32) | out[1];
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

}  // namespace glelab
