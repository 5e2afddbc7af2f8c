#pragma once

#include <cstdint>

namespace prunekit {

/// 64-bit linear congruential generator.
///
///   state' = state * 6364136223846793005 + 1442695040888963407   (mod 2^64)
///
/// Constants are Knuth's MMIX multiplier/increment. A 64-bit output is the
/// high 32 bits of two consecutive states concatenated; low LCG bits have short
/// periods and are discarded. The seed is passed through one SplitMix64 round so nearby seeds
/// (0, 1, 2, ...) start from unrelated states.
class Lcg64 {
public:
    static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
    static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

    explicit Lcg64(std::uint64_t seed);

    std::uint64_t next_u64();
    std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64() >> 32); }

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; the second variate is cached.
    double normal();

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// SplitMix64 finalizer; used for seeding and for deriving child seeds.
std::uint64_t mix64(std::uint64_t x);

// Combines a base seed with a value into a new seed (order-sensitive).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t value) {
    return mix64(base ^ mix64(value + 0x9E3779B97F4A7C15ULL));
}

}  // namespace prunekit
