#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace hoam {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stream key for realization (a, b) under a master seed.
constexpr std::uint64_t stream_key(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t h = mix64(master ^ 0x6A09E667F3BCC909ULL);
    h = mix64(h + 0x9E3779B97F4A7C15ULL * (a + 1));
    h = mix64(h ^ (0xD1B54A32D192ED03ULL * (b + 1)));
    return h;
}

/// Counter-based generator: the k-th draw is a pure function of (key, k), so
/// a stream can be reproduced without replaying any other stream. Normal
/// variates use Box-Muller so results do not depend on the standard library.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    constexpr std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on (0, 1), 53-bit resolution.
    double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    /// Two independent standard normal variates.
    std::pair<double, double> normal_pair() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        return {rad * std::cos(ang), rad * std::sin(ang)};
    }

    double normal() noexcept { return normal_pair().first; }

    [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace hoam
