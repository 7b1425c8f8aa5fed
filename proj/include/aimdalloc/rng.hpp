#pragma once

#include <cstdint>
#include <random>

namespace aimdalloc {

// splitmix64 finalizer; used as the documented seed-derivation hash so that
// substream layout is reproducible from a single master seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream tags. Cost sampling and per-step Bernoulli draws live on unrelated
// substreams so that changing one consumer cannot perturb the other.
inline constexpr std::uint64_t kCostStreamTag = 0x636f7374'647277ULL;
inline constexpr std::uint64_t kAgentStreamTag = 0x73746570'647277ULL;

/// substream seed for (master seed, tag, index) = mix64(mix64(seed ^ tag) ^ index)
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t tag,
                                        std::uint64_t index) {
    return mix64(mix64(seed ^ tag) ^ index);
}

/// Deterministic random stream.
///
/// Wraps std::mt19937_64 (whose output sequence is pinned by the standard)
/// with fixed variate mappings, so the number of engine words consumed per
/// logical draw is part of the contract:
///   - next_double(): one word, 53-bit mantissa uniform in [0, 1)
///   - next_int(lo, hi): one word per rejection round (almost always one)
///   - bernoulli(p): exactly one word
class Rng {
public:
    Rng() : engine_(0) {}
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53 random bits.
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
    std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit span
        const std::uint64_t reject_below = (0 - range) % range;
        for (;;) {
            const std::uint64_t v = engine_();
            if (v >= reject_below) return lo + static_cast<std::int64_t>(v % range);
        }
    }

    /// True with probability p. Consumes exactly one engine word.
    bool bernoulli(double p) { return next_double() < p; }

    bool operator==(const Rng&) const = default;

private:
    std::mt19937_64 engine_;
};

}  // namespace aimdalloc
