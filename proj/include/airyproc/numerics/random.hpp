#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace airyproc::numerics {

/**
 * Seedable Gaussian source.
 *
 * Engine: std::mt19937_64, whose output sequence is fixed by the C++
 * standard. It is seeded through std::seed_seq from (seed, stream_id), so
 * every (seed, stream_id) pair is an independent, portable substream.
 *
 * Normal deviates use the basic Box-Muller transform on 53-bit uniforms.
 * std::normal_distribution is avoided on purpose: its algorithm is
 * implementation-defined, and sampled batches must be identical across
 * standard libraries.
 */
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0) : seed_(seed), stream_id_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                          0x41697279u};
        engine_.seed(seq);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Uniform on (0, 1], 53 bits.
    double uniform() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

/// Two independent N(0,1) deviates (Box-Muller).
inline std::pair<double, double> gaussian_pair(RandomStream& stream) {
    const double u1 = stream.uniform();
    const double u2 = stream.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace airyproc::numerics
