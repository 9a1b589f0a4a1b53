#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskbounds/parallel.hpp"
#include "riskbounds/prob.hpp"
#include "riskbounds/rng.hpp"

namespace riskbounds {

namespace detail {

/// Digamma for x > 0: recurrence up the axis, then the asymptotic series.
/// The series is truncated after the 1/x^8 term, so the recurrence runs
/// until x >= 16 to keep the truncation error below 1e-14.
inline double digamma(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("digamma: x must be > 0");
    double result = 0.0;
    while (x < 16.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
    return result;
}

}  // namespace detail

/**
 * Dirichlet posterior over the unknown source distribution: prior
 * concentration alpha plus observed counts from an n-sample.
 */
struct PosteriorSpec {
    std::vector<double> prior_alpha;
    std::vector<std::uint64_t> counts;
    std::uint64_t n = 0;

    void validate() const {
        if (prior_alpha.empty() || prior_alpha.size() != counts.size())
            throw std::invalid_argument("PosteriorSpec: alpha/counts size mismatch");
        if (n == 0) throw std::invalid_argument("PosteriorSpec: n must be >= 1");
        for (double a : prior_alpha)
            if (!(a > 0.0)) throw std::invalid_argument("PosteriorSpec: prior_alpha must be strictly positive");
        const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
        if (total != n) throw std::invalid_argument("PosteriorSpec: counts must sum to n");
    }

    /// Empirical PMF counts/n.
    Pmf empirical() const {
        std::vector<double> q(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i)
            q[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
        return Pmf(std::move(q));
    }

    static PosteriorSpec symmetric(double alpha, std::vector<std::uint64_t> counts) {
        PosteriorSpec s;
        s.n = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
        s.prior_alpha.assign(counts.size(), alpha);
        s.counts = std::move(counts);
        s.validate();
        return s;
    }
};

struct ComplexityEstimate {
    double mean = 0.0;        // Monte-Carlo mean of (1/2) D_KL(q || q_bar), nats
    double std_error = 0.0;   // standard error of the mean
    std::uint64_t num_samples = 0;
    double closed_form = 0.0; // exact digamma value for the same posterior

    /// MC and closed form agree within 4 standard errors.
    bool consistent() const { return std::abs(mean - closed_form) <= 4.0 * std_error; }
};

/// Posterior mean (alpha_z + counts_z) / (alpha_0 + n).
inline Pmf posterior_mean(const PosteriorSpec& spec) {
    spec.validate();
    const double alpha0 = std::accumulate(spec.prior_alpha.begin(), spec.prior_alpha.end(), 0.0);
    const double denom = alpha0 + static_cast<double>(spec.n);
    std::vector<double> m(spec.counts.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] = (spec.prior_alpha[i] + static_cast<double>(spec.counts[i])) / denom;
    return Pmf(std::move(m));
}

/**
 * Exact task complexity under the Dirichlet posterior:
 *   (1/2) E[D_KL(q || q_bar)]
 *     = (1/2) [ -H(q) - sum_{q(z)>0} q(z) (psi(alpha_z + c_z) - psi(alpha_0 + n)) ],
 * using E[ln q_bar(z)] = psi(alpha_z + c_z) - psi(alpha_0 + n).
 */
inline double complexity_closed_form(const PosteriorSpec& spec) {
    spec.validate();
    const double alpha0 = std::accumulate(spec.prior_alpha.begin(), spec.prior_alpha.end(), 0.0);
    const double psi_total = detail::digamma(alpha0 + static_cast<double>(spec.n));
    const double n = static_cast<double>(spec.n);
    double h = 0.0;
    double cross = 0.0;
    for (std::size_t i = 0; i < spec.counts.size(); ++i) {
        if (spec.counts[i] == 0) continue;
        const double q = static_cast<double>(spec.counts[i]) / n;
        h -= q * std::log(q);
        cross += q * (detail::digamma(spec.prior_alpha[i] + static_cast<double>(spec.counts[i])) - psi_total);
    }
    return 0.5 * (-h - cross);
}

/**
 * Reported-only upper bound -H(q) + sum_z q(z) (E[1/q_bar(z)] - 1), using
 * E[1/X_z] = (alpha_0 + n - 1)/(alpha_z + c_z - 1) under the posterior.
 * Defined only when every count is positive (the derivation does not
 * survive zero-count symbols); surfaced for inspection, never asserted
 * against the closed form.
 */
inline std::optional<double> complexity_upper_bound_report(const PosteriorSpec& spec) {
    spec.validate();
    for (std::uint64_t c : spec.counts)
        if (c == 0) return std::nullopt;
    const double alpha0 = std::accumulate(spec.prior_alpha.begin(), spec.prior_alpha.end(), 0.0);
    const double n = static_cast<double>(spec.n);
    double h = 0.0;
    double inv_mean = 0.0;
    for (std::size_t i = 0; i < spec.counts.size(); ++i) {
        const double q = static_cast<double>(spec.counts[i]) / n;
        h -= q * std::log(q);
        inv_mean += q * ((alpha0 + n - 1.0) / (spec.prior_alpha[i] + static_cast<double>(spec.counts[i]) - 1.0) - 1.0);
    }
    return -h + inv_mean;
}

/**
 * Jensen lower bound on the complexity:
 *   (1/2) E[D_KL(q || q_bar)] >= (1/2) D_KL(q || E[q_bar]).
 * The 1/2 carries the definition's scaling through the Jensen step; the
 * unscaled form is not a valid bound (counts (4,0) with a unit prior give
 * D_KL = ln(6/5) ~ 0.182 against a complexity of 0.1).
 */
inline double complexity_lower_bound(const PosteriorSpec& spec) {
    return 0.5 * kl_divergence(spec.empirical(), posterior_mean(spec));
}

/**
 * Monte-Carlo complexity estimate: mean of (1/2) D_KL(q || q_bar_k) over
 * posterior draws q_bar_k ~ Dirichlet(alpha + counts). Deterministic per
 * seed and independent of `jobs`. Draws that round a needed coordinate to
 * zero are resampled; more than 0.1% of them is a numeric error.
 */
inline ComplexityEstimate estimate_complexity(const PosteriorSpec& spec, std::uint64_t num_samples, RngSeed seed,
                                              unsigned jobs = 1) {
    spec.validate();
    if (num_samples < 100) throw std::invalid_argument("estimate_complexity: num_samples must be >= 100");
    const Pmf q = spec.empirical();
    std::vector<double> posterior_alpha(spec.prior_alpha);
    for (std::size_t i = 0; i < posterior_alpha.size(); ++i)
        posterior_alpha[i] += static_cast<double>(spec.counts[i]);

    struct Acc {
        double sum = 0.0;
        double sum_sq = 0.0;
        std::uint64_t resamples = 0;
    };
    constexpr std::size_t kChunk = 4096;
    const Acc total = chunked_reduce<Acc>(
        num_samples, kChunk, jobs,
        [&](std::size_t chunk_idx, std::size_t begin, std::size_t end) {
            CounterRng rng(seed, chunk_idx + 1);
            Acc acc;
            for (std::size_t i = begin; i < end; ++i) {
                double d;
                for (int attempt = 0;; ++attempt) {
                    const Pmf q_bar = sample_dirichlet(posterior_alpha, rng);
                    d = detail::kl_unchecked(q.probs, q_bar.probs);
                    if (std::isfinite(d)) break;
                    ++acc.resamples;
                    if (attempt >= 100)
                        throw std::runtime_error("estimate_complexity: persistent zero-coordinate draws");
                }
                const double half = 0.5 * d;
                acc.sum += half;
                acc.sum_sq += half * half;
            }
            return acc;
        },
        [](Acc& out, const Acc& in) {
            out.sum += in.sum;
            out.sum_sq += in.sum_sq;
            out.resamples += in.resamples;
        },
        Acc{});

    if (static_cast<double>(total.resamples) > 1e-3 * static_cast<double>(num_samples))
        throw std::runtime_error("estimate_complexity: zero-coordinate resample rate above 0.1%");

    const double n = static_cast<double>(num_samples);
    ComplexityEstimate est;
    est.num_samples = num_samples;
    est.mean = total.sum / n;
    const double var = std::max(0.0, total.sum_sq / n - est.mean * est.mean);
    est.std_error = std::sqrt(var / n);
    est.closed_form = complexity_closed_form(spec);
    return est;
}

// ---------------------------------------------------------------------------
// Uniformity ordering
// ---------------------------------------------------------------------------

struct UniformityReport {
    double uniform_complexity = 0.0;
    double min_other = 0.0;
    double max_other = 0.0;
    std::size_t num_competitors = 0;
    bool uniform_is_min = false;
};

/**
 * Compares the closed-form complexity of the uniform count vector against
 * a seeded set of strictly less uniform compositions of n into k parts
 * (every composition majorizes the uniform one). k = 2 is enumerated
 * exhaustively; larger alphabets use `num_random` random compositions.
 */
inline UniformityReport uniformity_ordering_check(std::uint64_t n, std::size_t k, RngSeed seed,
                                                  std::size_t num_random = 50, double prior_alpha = 1.0) {
    if (k < 2) throw std::invalid_argument("uniformity_ordering_check: k must be >= 2");
    if (n % k != 0) throw std::invalid_argument("uniformity_ordering_check: n must be divisible by k");
    const std::uint64_t per = n / k;
    const std::vector<std::uint64_t> uniform(k, per);

    auto complexity_of = [&](std::vector<std::uint64_t> counts) {
        return complexity_closed_form(PosteriorSpec::symmetric(prior_alpha, std::move(counts)));
    };
    auto is_uniform = [&](const std::vector<std::uint64_t>& c) {
        return std::all_of(c.begin(), c.end(), [&](std::uint64_t v) { return v == per; });
    };

    std::vector<std::vector<std::uint64_t>> competitors;
    if (k == 2) {
        for (std::uint64_t c = 0; c <= n; ++c) {
            std::vector<std::uint64_t> v{c, n - c};
            if (!is_uniform(v)) competitors.push_back(std::move(v));
        }
    } else {
        CounterRng rng(seed);
        while (competitors.size() < num_random) {
            // Composition of n via a uniform multinomial draw.
            std::vector<std::uint64_t> v = multinomial_counts(Pmf::uniform(k), n, rng);
            if (!is_uniform(v)) competitors.push_back(std::move(v));
        }
    }

    UniformityReport rep;
    rep.uniform_complexity = complexity_of(uniform);
    rep.num_competitors = competitors.size();
    rep.min_other = kInfinity;
    rep.max_other = -kInfinity;
    for (auto& c : competitors) {
        const double v = complexity_of(std::move(c));
        rep.min_other = std::min(rep.min_other, v);
        rep.max_other = std::max(rep.max_other, v);
    }
    rep.uniform_is_min = rep.uniform_complexity <= rep.min_other;
    return rep;
}

// ---------------------------------------------------------------------------
// Generalization-bound Monte Carlo
// ---------------------------------------------------------------------------

/**
 * Tail comparison for the generalization bound: empirical
 * Pr(gen >= eps) against L^2 mean(D_KL) / (2 eps^2), plus the
 * intermediate tail Pr(D_KL >= t) at t = 2 eps^2 / L^2 for checking the
 * Markov step on its own.
 */
struct GenBoundReport {
    std::vector<double> epsilon_grid;
    std::vector<double> empirical_tail;    // Pr(gen >= eps)
    std::vector<double> bound_values;      // L^2 mean_kl / (2 eps^2)
    double loss_sup = 0.0;                 // L
    std::uint64_t trials = 0;
    double mean_kl = 0.0;                  // mean D_KL(q || q_bar) over trials
    std::vector<double> markov_t_grid;     // t = 2 eps^2 / L^2
    std::vector<double> markov_tail;       // Pr(D_KL >= t)
    bool low_trials_warning = false;       // trials < 1000
};

/// Wilson-interval half-width for k successes in n trials at z sigmas.
inline double wilson_half_width(double k, double n, double z = 3.0) {
    if (n <= 0.0) return 0.0;
    const double phat = k / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    return z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
}

/**
 * Brute-force check of the generalization tail bound: draws empirical PMFs
 * q ~ Multinomial(n, q_bar)/n, measures gen = |E_q l - E_qbar l| and
 * D_KL(q || q_bar), and tabulates both tails on the epsilon grid.
 * Deterministic per seed and independent of `jobs`.
 */
inline GenBoundReport verify_gen_bound(const Pmf& q_bar, std::uint64_t n, const std::vector<double>& loss_table,
                                       double loss_sup, const std::vector<double>& epsilon_grid,
                                       std::uint64_t trials, RngSeed seed, unsigned jobs = 1) {
    q_bar.validate();
    if (q_bar.probs.size() > 1000)
        throw std::invalid_argument("verify_gen_bound: alphabet above the desk-scale cap (1000)");
    if (n == 0) throw std::invalid_argument("verify_gen_bound: n must be >= 1");
    if (trials == 0) throw std::invalid_argument("verify_gen_bound: trials must be >= 1");
    if (loss_table.size() != q_bar.probs.size())
        throw std::invalid_argument("verify_gen_bound: loss table size mismatch");
    if (!(loss_sup > 0.0)) throw std::invalid_argument("verify_gen_bound: L must be > 0");
    for (double v : loss_table)
        if (!(v >= 0.0) || v > loss_sup) throw std::invalid_argument("verify_gen_bound: loss outside [0, L]");
    if (epsilon_grid.empty()) throw std::invalid_argument("verify_gen_bound: empty epsilon grid");
    for (std::size_t i = 0; i + 1 < epsilon_grid.size(); ++i)
        if (!(epsilon_grid[i] < epsilon_grid[i + 1]))
            throw std::invalid_argument("verify_gen_bound: epsilon grid must be strictly increasing");
    if (!(epsilon_grid.front() > 0.0)) throw std::invalid_argument("verify_gen_bound: epsilon must be > 0");

    const std::size_t ne = epsilon_grid.size();
    std::vector<double> t_grid(ne);
    for (std::size_t i = 0; i < ne; ++i) t_grid[i] = 2.0 * epsilon_grid[i] * epsilon_grid[i] / (loss_sup * loss_sup);

    double mean_loss = 0.0;
    for (std::size_t z = 0; z < loss_table.size(); ++z) mean_loss += q_bar.probs[z] * loss_table[z];

    struct Acc {
        double kl_sum = 0.0;
        std::vector<std::uint64_t> gen_exceed;
        std::vector<std::uint64_t> kl_exceed;
    };
    constexpr std::size_t kChunk = 2048;
    const Acc total = chunked_reduce<Acc>(
        trials, kChunk, jobs,
        [&](std::size_t chunk_idx, std::size_t begin, std::size_t end) {
            CounterRng rng(seed, chunk_idx + 1);
            Acc acc;
            acc.gen_exceed.assign(ne, 0);
            acc.kl_exceed.assign(ne, 0);
            const double inv_n = 1.0 / static_cast<double>(n);
            std::vector<double> q(q_bar.probs.size());
            for (std::size_t t = begin; t < end; ++t) {
                const std::vector<std::uint64_t> counts = multinomial_counts(q_bar, n, rng);
                double emp_loss = 0.0;
                for (std::size_t z = 0; z < counts.size(); ++z) {
                    q[z] = static_cast<double>(counts[z]) * inv_n;
                    emp_loss += q[z] * loss_table[z];
                }
                const double gen = std::abs(emp_loss - mean_loss);
                const double d = detail::kl_unchecked(q, q_bar.probs);
                acc.kl_sum += d;
                for (std::size_t i = 0; i < ne; ++i) {
                    if (gen >= epsilon_grid[i]) ++acc.gen_exceed[i];
                    if (d >= t_grid[i]) ++acc.kl_exceed[i];
                }
            }
            return acc;
        },
        [ne](Acc& out, const Acc& in) {
            if (out.gen_exceed.empty()) {
                out.gen_exceed.assign(ne, 0);
                out.kl_exceed.assign(ne, 0);
            }
            out.kl_sum += in.kl_sum;
            for (std::size_t i = 0; i < ne; ++i) {
                out.gen_exceed[i] += in.gen_exceed[i];
                out.kl_exceed[i] += in.kl_exceed[i];
            }
        },
        Acc{});

    GenBoundReport rep;
    rep.epsilon_grid = epsilon_grid;
    rep.loss_sup = loss_sup;
    rep.trials = trials;
    rep.low_trials_warning = trials < 1000;
    rep.mean_kl = total.kl_sum / static_cast<double>(trials);
    rep.markov_t_grid = t_grid;
    rep.empirical_tail.resize(ne);
    rep.bound_values.resize(ne);
    rep.markov_tail.resize(ne);
    for (std::size_t i = 0; i < ne; ++i) {
        rep.empirical_tail[i] = static_cast<double>(total.gen_exceed[i]) / static_cast<double>(trials);
        rep.markov_tail[i] = static_cast<double>(total.kl_exceed[i]) / static_cast<double>(trials);
        rep.bound_values[i] = loss_sup * loss_sup * rep.mean_kl / (2.0 * epsilon_grid[i] * epsilon_grid[i]);
    }
    return rep;
}

}  // namespace riskbounds
