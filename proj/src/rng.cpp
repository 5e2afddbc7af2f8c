#include "prunekit/rng.hpp"

#include <cmath>
#include <numbers>

namespace prunekit {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Lcg64::Lcg64(std::uint64_t seed) : state_(mix64(seed)) {}

std::uint64_t Lcg64::next_u64() {
    state_ = state_ * kMultiplier + kIncrement;
    std::uint64_t hi = state_ >> 32;
    std::uint64_t next = state_ * kMultiplier + kIncrement;
    state_ = next;
    return (hi << 32) | (next >> 32);
}

double Lcg64::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Lcg64::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t Lcg64::below(std::uint64_t n) {
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
}

}  // namespace prunekit
