#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace riskbounds {

/// Seed for every randomized operation in the library.
struct RngSeed {
    std::uint64_t seed = 0;
};

namespace detail {

// Finalizer from splitmix64. Full-avalanche 64-bit mix.
inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/**
 * Counter-based generator: output i is a pure function of (key, i), so
 * independent streams are cheap (any (seed, stream) pair is a new key) and
 * sequences are identical across platforms and thread counts.
 */
class CounterRng {
public:
    explicit CounterRng(RngSeed seed, std::uint64_t stream = 0) noexcept
        : key_(detail::mix64(seed.seed + detail::mix64(stream * detail::kGolden + 0x6a09e667f3bcc909ULL))),
          counter_(0) {}

    std::uint64_t next_u64() noexcept {
        counter_ += detail::kGolden;
        return detail::mix64(key_ ^ detail::mix64(counter_));
    }

    /// Uniform double in [0, 1).
    double next_double() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1].
    double next_double_open_zero() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * next_double();
    }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("CounterRng::next_below: n must be positive");
        // Rejection keeps the distribution exactly uniform.
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller; the spare value is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_double_open_zero();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /**
     * Gamma(alpha, 1) draw, alpha > 0. Marsaglia-Tsang squeeze for
     * alpha >= 1, boosted by U^{1/alpha} below 1.
     */
    double gamma(double alpha) {
        if (!(alpha > 0.0)) throw std::invalid_argument("CounterRng::gamma: alpha must be > 0");
        if (alpha < 1.0) {
            const double u = next_double_open_zero();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_double_open_zero();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace riskbounds
