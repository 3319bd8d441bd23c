#pragma once

#include <cstdint>
#include <random>

namespace scs {

// Seed plus a stream id. Identical (seed, stream_id) pairs always reproduce
// the same draws; distinct purposes use distinct streams so that e.g. mask
// and noise draws can be replayed independently.
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    RngSpec with_stream(std::uint64_t stream) const { return {seed, stream}; }
    RngSpec offset(std::uint64_t delta) const { return {seed, stream_id + delta}; }
};

// Well-known purpose streams.
namespace stream {
constexpr std::uint64_t masks = 1;
constexpr std::uint64_t noise = 2;
constexpr std::uint64_t phantom = 3;
constexpr std::uint64_t codec = 4;
constexpr std::uint64_t signal = 5;
// Per-trial streams of Monte Carlo experiments start here.
constexpr std::uint64_t trial_base = 1u << 20;
} // namespace stream

inline std::mt19937_64 make_engine(const RngSpec& spec) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(spec.seed),
        static_cast<std::uint32_t>(spec.seed >> 32),
        static_cast<std::uint32_t>(spec.stream_id),
        static_cast<std::uint32_t>(spec.stream_id >> 32),
    };
    return std::mt19937_64(seq);
}

} // namespace scs
