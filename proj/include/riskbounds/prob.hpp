#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskbounds/rng.hpp"

namespace riskbounds {

inline constexpr double kPmfSumTolerance = 1e-12;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/**
 * Probability mass function over a finite alphabet. Entries are
 * non-negative and sum to 1 within 1e-12 absolute.
 */
struct Pmf {
    std::vector<double> probs;

    Pmf() = default;
    explicit Pmf(std::vector<double> p) : probs(std::move(p)) { validate(); }

    std::size_t alphabet_size() const { return probs.size(); }
    double operator[](std::size_t i) const { return probs[i]; }

    void validate() const {
        if (probs.empty()) throw std::invalid_argument("Pmf: empty alphabet");
        double sum = 0.0;
        for (double v : probs) {
            if (!(v >= 0.0)) throw std::invalid_argument("Pmf: negative or NaN entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kPmfSumTolerance)
            throw std::invalid_argument("Pmf: entries sum to " + std::to_string(sum) + ", expected 1");
    }

    static Pmf uniform(std::size_t k) {
        if (k == 0) throw std::invalid_argument("Pmf::uniform: k must be positive");
        return Pmf(std::vector<double>(k, 1.0 / static_cast<double>(k)));
    }
};

/// Raw model scores, one per label. Finite by contract.
struct Logits {
    std::vector<double> values;

    Logits() = default;
    explicit Logits(std::vector<double> v) : values(std::move(v)) { validate(); }

    void validate() const {
        if (values.empty()) throw std::invalid_argument("Logits: empty");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("Logits: non-finite entry");
    }
};

namespace detail {

inline void require_same_alphabet(const Pmf& a, const Pmf& b, const char* where) {
    if (a.probs.size() != b.probs.size())
        throw std::invalid_argument(std::string(where) + ": alphabet size mismatch");
}

// -sum p ln p with 0 ln 0 := 0. Assumes a valid Pmf.
inline double entropy_unchecked(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

// sum q ln(q/p); 0 ln(0/.) := 0, q>0 over p=0 gives +inf. Assumes valid
// Pmfs. Rounding on near-equal inputs is clamped so the result is never
// negative.
inline double kl_unchecked(const std::vector<double>& q, const std::vector<double>& p) {
    double d = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] <= 0.0) continue;
        if (p[i] <= 0.0) return kInfinity;
        d += q[i] * std::log(q[i] / p[i]);
    }
    return d < 0.0 ? 0.0 : d;
}

}  // namespace detail

/// Shannon entropy in nats.
inline double entropy(const Pmf& p) {
    p.validate();
    return detail::entropy_unchecked(p.probs);
}

/// D_KL(q || p) in nats; +inf when q puts mass where p has none.
inline double kl_divergence(const Pmf& q, const Pmf& p) {
    detail::require_same_alphabet(q, p, "kl_divergence");
    q.validate();
    p.validate();
    return detail::kl_unchecked(q.probs, p.probs);
}

/// Total variation style L1 distance, in [0, 2].
inline double l1_distance(const Pmf& q, const Pmf& p) {
    detail::require_same_alphabet(q, p, "l1_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < q.probs.size(); ++i) s += std::abs(q.probs[i] - p.probs[i]);
    return s;
}

struct SoftmaxResult {
    Pmf pmf;
    double log_partition = 0.0;
};

/// Max-shift stabilized softmax plus ln Z.
inline SoftmaxResult softmax(const Logits& f) {
    f.validate();
    const double fmax = *std::max_element(f.values.begin(), f.values.end());
    double z = 0.0;
    std::vector<double> p(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        p[i] = std::exp(f.values[i] - fmax);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return SoftmaxResult{Pmf(std::move(p)), std::log(z) + fmax};
}

/**
 * Slack of the bounded-difference KL inequality:
 *   D_KL(q||p) - (2/L^2) (E_q f - E_p f)^2,
 * for a statistic f with values in [0, L]. Non-negative for valid inputs.
 */
inline double pinsker_gap(const Pmf& q, const Pmf& p, const std::vector<double>& f, double loss_sup) {
    detail::require_same_alphabet(q, p, "pinsker_gap");
    if (f.size() != q.probs.size()) throw std::invalid_argument("pinsker_gap: f size mismatch");
    if (!(loss_sup > 0.0)) throw std::invalid_argument("pinsker_gap: L must be > 0");
    for (double v : f)
        if (!(v >= 0.0) || v > loss_sup) throw std::invalid_argument("pinsker_gap: f out of range [0, L]");
    double diff = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) diff += (q.probs[i] - p.probs[i]) * f[i];
    const double d = kl_divergence(q, p);
    return d - 2.0 / (loss_sup * loss_sup) * diff * diff;
}

/**
 * Multinomial(n, q_bar) counts via n inverse-CDF categorical draws on the
 * provided stream. Exposed because several callers need raw counts.
 */
inline std::vector<std::uint64_t> multinomial_counts(const Pmf& q_bar, std::uint64_t n, CounterRng& rng) {
    q_bar.validate();
    if (n == 0) throw std::invalid_argument("multinomial_counts: n must be >= 1");
    const std::size_t k = q_bar.probs.size();
    std::vector<double> cdf(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        acc += q_bar.probs[i];
        cdf[i] = acc;
    }
    cdf[k - 1] = 1.0;
    std::vector<std::uint64_t> counts(k, 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double u = rng.next_double();
        const std::size_t idx =
            static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        ++counts[idx < k ? idx : k - 1];
    }
    return counts;
}

/// Empirical PMF of n i.i.d. draws from q_bar. Entries are multiples of 1/n.
inline Pmf sample_empirical(const Pmf& q_bar, std::uint64_t n, RngSeed seed) {
    CounterRng rng(seed);
    const std::vector<std::uint64_t> counts = multinomial_counts(q_bar, n, rng);
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
    return Pmf(std::move(p));
}

/// Dirichlet(alpha) draw on an explicit stream (normalized Gamma draws).
inline Pmf sample_dirichlet(const std::vector<double>& alpha, CounterRng& rng) {
    if (alpha.empty()) throw std::invalid_argument("sample_dirichlet: empty alpha");
    for (double a : alpha)
        if (!(a > 0.0)) throw std::invalid_argument("sample_dirichlet: alpha entries must be > 0");
    std::vector<double> g(alpha.size());
    double sum = 0.0;
    do {
        sum = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            g[i] = rng.gamma(alpha[i]);
            sum += g[i];
        }
    } while (!(sum > 0.0));
    for (double& v : g) v /= sum;
    return Pmf(std::move(g));
}

inline Pmf sample_dirichlet(const std::vector<double>& alpha, RngSeed seed) {
    CounterRng rng(seed);
    return sample_dirichlet(alpha, rng);
}

}  // namespace riskbounds
