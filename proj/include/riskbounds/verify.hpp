#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "riskbounds/complexity.hpp"
#include "riskbounds/dataset.hpp"
#include "riskbounds/experiment.hpp"
#include "riskbounds/fitdiag.hpp"
#include "riskbounds/model.hpp"
#include "riskbounds/risk.hpp"

namespace riskbounds {

/// One verified contract: margin is the worst slack observed (negative
/// means the contract was violated somewhere in the sweep).
struct CheckResult {
    std::string name;
    bool passed = false;
    double margin = 0.0;
    std::string detail;
};

using CheckList = std::vector<CheckResult>;

struct VerifyOptions {
    std::uint64_t seed = 20260811;
    unsigned jobs = 1;
    std::optional<std::uint64_t> trials;  // overrides the Monte-Carlo trial counts
};

namespace verify_detail {

inline std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

inline Pmf rand_pmf(CounterRng& rng, std::size_t k) {
    std::vector<double> alpha(k, 1.0);
    return sample_dirichlet(alpha, rng);
}

inline std::vector<double> rand_x(CounterRng& rng, std::size_t d) {
    std::vector<double> x(d);
    for (double& v : x) v = rng.normal();
    return x;
}

inline Dataset rand_dataset(CounterRng& rng, std::size_t entries, std::size_t dim, std::size_t classes) {
    Dataset ds;
    const Pmf w = rand_pmf(rng, entries);
    for (std::size_t i = 0; i < entries; ++i)
        ds.entries.push_back(Dataset::Entry{rand_x(rng, dim), rand_pmf(rng, classes), w.probs[i]});
    ds.validate();
    return ds;
}

inline linalg::Matrix rand_psd(CounterRng& rng, std::size_t n) {
    linalg::Matrix m(n, n);
    for (double& v : m.data) v = rng.normal();
    return linalg::gram(m);
}

/// Sorted-descending prefix-sum majorization test: a majorizes b.
inline bool majorizes(std::vector<std::uint64_t> a, std::vector<std::uint64_t> b) {
    std::sort(a.rbegin(), a.rend());
    std::sort(b.rbegin(), b.rend());
    std::uint64_t pa = 0;
    std::uint64_t pb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa += a[i];
        pb += b[i];
        if (pa < pb) return false;
    }
    return pa == pb;
}

/// The 6-cell toy joint used by the Monte-Carlo theorem checks: three
/// 2-d feature points, two labels.
inline JointPmf toy_joint() {
    JointPmf j;
    j.features = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    j.probs = linalg::Matrix(3, 2);
    j.probs(0, 0) = 0.25;
    j.probs(0, 1) = 0.05;
    j.probs(1, 0) = 0.10;
    j.probs(1, 1) = 0.20;
    j.probs(2, 0) = 0.15;
    j.probs(2, 1) = 0.25;
    j.validate();
    return j;
}

}  // namespace verify_detail

// ---------------------------------------------------------------------------
// Lemma-level checks
// ---------------------------------------------------------------------------

/// Empirical Markov inequality Pr(Z >= t) <= E[Z]/t on a sampled
/// non-negative variable; holds pointwise, so the slack is exact.
inline CheckResult check_markov_inequality(std::size_t samples, std::uint64_t seed) {
    CounterRng rng(RngSeed{seed});
    std::vector<double> z(samples);
    double mean = 0.0;
    for (double& v : z) {
        v = rng.gamma(1.7);
        mean += v;
    }
    mean /= static_cast<double>(samples);
    double worst = kInfinity;
    for (double t : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        std::size_t exceed = 0;
        for (double v : z)
            if (v >= t) ++exceed;
        const double tail = static_cast<double>(exceed) / static_cast<double>(samples);
        worst = std::min(worst, mean / t - tail);
    }
    return CheckResult{"markov_inequality", worst >= 0.0, worst,
                       "min over t of E[Z]/t - Pr(Z>=t) = " + verify_detail::fmt(worst)};
}

/// D_KL(q||p) - (2/L^2)(E_q f - E_p f)^2 >= -1e-12 on random quadruples.
inline CheckResult check_pinsker_gap(std::size_t cases, std::uint64_t seed) {
    CounterRng rng(RngSeed{seed});
    double worst = kInfinity;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t k = 2 + rng.next_below(7);
        const Pmf q = verify_detail::rand_pmf(rng, k);
        const Pmf p = verify_detail::rand_pmf(rng, k);
        const double loss_sup = 0.1 + 10.0 * rng.next_double();
        std::vector<double> f(k);
        for (double& v : f) v = loss_sup * rng.next_double();
        worst = std::min(worst, pinsker_gap(q, p, f, loss_sup));
    }
    return CheckResult{"pinsker_gap", worst >= -1e-12, worst + 1e-12,
                       "min gap over " + std::to_string(cases) + " quadruples = " + verify_detail::fmt(worst)};
}

/// Pinsker: D_KL(q||p) >= ||q-p||_1^2 / 2 on random pairs.
inline CheckResult check_pinsker_inequality(std::size_t cases, std::uint64_t seed) {
    CounterRng rng(RngSeed{seed});
    double worst = kInfinity;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t k = 2 + rng.next_below(9);
        const Pmf q = verify_detail::rand_pmf(rng, k);
        const Pmf p = verify_detail::rand_pmf(rng, k);
        const double l1 = l1_distance(q, p);
        worst = std::min(worst, kl_divergence(q, p) - 0.5 * l1 * l1);
    }
    return CheckResult{"pinsker_inequality", worst >= -1e-12, worst + 1e-12,
                       "min D_KL - L1^2/2 over " + std::to_string(cases) + " pairs = " + verify_detail::fmt(worst)};
}

/// KL non-negativity with equality only at q = p.
inline CheckResult check_kl_nonnegativity(std::size_t cases, std::uint64_t seed) {
    CounterRng rng(RngSeed{seed});
    double worst = kInfinity;
    bool equality_ok = true;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t k = 2 + rng.next_below(9);
        const Pmf q = verify_detail::rand_pmf(rng, k);
        const Pmf p = verify_detail::rand_pmf(rng, k);
        const double d = kl_divergence(q, p);
        worst = std::min(worst, d);
        if (d <= 1e-12) {
            for (std::size_t i = 0; i < k; ++i)
                if (std::abs(q.probs[i] - p.probs[i]) > 1e-5) equality_ok = false;
        }
        if (kl_divergence(q, q) > 1e-12) equality_ok = false;
    }
    const bool passed = worst >= 0.0 && equality_ok;
    return CheckResult{"kl_nonnegativity", passed, worst,
                       "min D_KL = " + verify_detail::fmt(worst) + (equality_ok ? "" : "; equality case violated")};
}

/// ||Ax||^2 = ||A||_F^2 ||x||^2 - sum_k ||a_k x x||^2 on random matrices.
inline CheckResult check_lagrange_identity(std::size_t cases, std::uint64_t seed) {
    CounterRng rng(RngSeed{seed});
    double worst = kInfinity;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t r = 1 + rng.next_below(20);
        const std::size_t k = 1 + rng.next_below(20);
        linalg::Matrix a(r, k);
        for (double& v : a.data) v = 3.0 * rng.normal();
        std::vector<double> x(k);
        for (double& v : x) v = 3.0 * rng.normal();
        const double tol = 1e-9 * (1.0 + linalg::frobenius_norm_sq(a) * linalg::norm_sq(x));
        worst = std::min(worst, tol - lagrange_identity_residual(a, x));
    }
    return CheckResult{"lagrange_identity", worst >= 0.0, worst,
                       "min tolerance slack over " + std::to_string(cases) + " cases = " + verify_detail::fmt(worst)};
}

/// Diagonal / trace sandwich and eigenvalue subadditivity on PSD pairs.
inline CheckResult check_eigenvalue_lemmas(std::size_t pairs, std::uint64_t seed) {
    CounterRng rng(RngSeed{seed});
    double worst = kInfinity;
    for (std::size_t c = 0; c < pairs; ++c) {
        const std::size_t n = 2 + rng.next_below(7);
        const linalg::Matrix a = verify_detail::rand_psd(rng, n);
        const linalg::Matrix b = verify_detail::rand_psd(rng, n);
        const auto ea = linalg::sym_eigenvalues(a);
        const auto eb = linalg::sym_eigenvalues(b);
        linalg::Matrix sum(n, n);
        for (std::size_t i = 0; i < n * n; ++i) sum.data[i] = a.data[i] + b.data[i];
        const auto es = linalg::sym_eigenvalues(sum);
        const double scale = std::max(1.0, ea.back() + eb.back());
        worst = std::min(worst, (ea.back() + eb.back() - es.back()) / scale);
        worst = std::min(worst, (es.front() - ea.front() - eb.front()) / scale);
        const double tr = linalg::trace(a);
        for (std::size_t i = 0; i < n; ++i) worst = std::min(worst, (ea.back() - a(i, i)) / scale);
        worst = std::min(worst, (tr - ea.back()) / scale);
        worst = std::min(worst, (static_cast<double>(n) * ea.back() - tr) / scale);
    }
    return CheckResult{"eigenvalue_lemmas", worst >= -1e-9, worst + 1e-9,
                       "min normalized slack over " + std::to_string(pairs) + " PSD pairs = " +
                           verify_detail::fmt(worst)};
}

// ---------------------------------------------------------------------------
// Fitting-error checks
// ---------------------------------------------------------------------------

/// F + G = ||q - p||^2 (total and per-parameter) on a 2-16-3 net.
inline CheckResult check_decomposition_identity(std::size_t cases, std::uint64_t seed) {
    const ModelSpec spec{2, {16}, 3, Activation::Tanh};
    CounterRng rng(RngSeed{seed});
    double worst_rel = 0.0;
    for (std::size_t c = 0; c < cases; ++c) {
        const ParamVector params = init_params(spec, RngSeed{rng.next_u64()});
        const std::vector<double> x = verify_detail::rand_x(rng, spec.input_dim);
        const Pmf q = verify_detail::rand_pmf(rng, spec.num_classes);
        const FitDecomposition d = decompose(spec, params, x, q);
        worst_rel = std::max(worst_rel, std::abs(d.f_term + d.g_term - d.residual_sq) / d.residual_sq);
        for (std::size_t j = 0; j < d.per_param_f.size(); ++j) {
            if (std::isnan(d.per_param_f[j])) continue;
            worst_rel =
                std::max(worst_rel, std::abs(d.per_param_f[j] + d.per_param_g[j] - d.residual_sq) / d.residual_sq);
        }
    }
    return CheckResult{"decomposition_identity", worst_rel <= 1e-9, 1e-9 - worst_rel,
                       "max relative identity error over " + std::to_string(cases) + " cases = " +
                           verify_detail::fmt(worst_rel)};
}

/// Theorem-level fitting bound and the Cauchy-Schwarz step on random
/// model/dataset pairs under softmax cross-entropy.
inline CheckList check_fitting_bound(std::size_t cases, std::uint64_t seed) {
    CounterRng rng(RngSeed{seed});
    double worst_bound = kInfinity;
    double worst_cs = kInfinity;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t hidden = 4 + rng.next_below(12);
        const ModelSpec spec{2, {hidden}, 3, Activation::Tanh};
        const ParamVector params = init_params(spec, RngSeed{rng.next_u64()});
        const Dataset ds = verify_detail::rand_dataset(rng, 3 + rng.next_below(8), 2, 3);
        const LossSpec loss = LossSpec::softmax_cross_entropy();
        const FitReport rep = fit_report(spec, params, ds, loss);
        worst_bound = std::min(worst_bound, rep.bound - rep.fit_normalized);
        worst_cs = std::min(worst_cs, cauchy_schwarz_gap(ds, spec, params, loss));
    }
    CheckList out;
    out.push_back(CheckResult{"fitting_bound", worst_bound >= -1e-9, worst_bound + 1e-9,
                              "min bound - fit_n over " + std::to_string(cases) + " pairs = " +
                                  verify_detail::fmt(worst_bound)});
    out.push_back(CheckResult{"cauchy_schwarz_gap", worst_cs >= -1e-12, worst_cs + 1e-12,
                              "min gap = " + verify_detail::fmt(worst_cs)});
    return out;
}

/// F <= lambda_max ||q-p||^2 / trace(eNTK) on random instances.
inline CheckResult check_f_term_entk_bound(std::size_t cases, std::uint64_t seed) {
    const ModelSpec spec{2, {8}, 3, Activation::Tanh};
    CounterRng rng(RngSeed{seed});
    double worst = kInfinity;
    for (std::size_t c = 0; c < cases; ++c) {
        const ParamVector params = init_params(spec, RngSeed{rng.next_u64()});
        const std::vector<double> x = verify_detail::rand_x(rng, 2);
        const Pmf q = verify_detail::rand_pmf(rng, 3);
        worst = std::min(worst, f_term_entk_bound_gap(spec, params, x, q));
    }
    return CheckResult{"f_term_entk_bound", worst >= -1e-12, worst + 1e-12,
                       "min gap over " + std::to_string(cases) + " cases = " + verify_detail::fmt(worst)};
}

/// G_M is non-increasing over parameter prefixes (exact set inclusion).
inline CheckResult check_g_min_monotonic(std::size_t cases, std::uint64_t seed) {
    CounterRng rng(RngSeed{seed});
    bool ok = true;
    for (std::size_t c = 0; c < cases && ok; ++c) {
        const ModelSpec spec{2, {4 + rng.next_below(8)}, 3, Activation::Tanh};
        const std::size_t m = spec.param_count();
        const ParamVector params = init_params(spec, RngSeed{rng.next_u64()});
        const Dataset ds = verify_detail::rand_dataset(rng, 4, 2, 3);
        const std::vector<std::size_t> prefixes{1, std::max<std::size_t>(2, m / 4), std::max<std::size_t>(3, m / 2),
                                                m};
        const std::vector<double> gm = g_min_monotonicity(spec, params, ds, prefixes);
        for (std::size_t i = 1; i < gm.size(); ++i)
            if (gm[i] > gm[i - 1]) ok = false;
    }
    return CheckResult{"g_min_monotonic", ok, ok ? 0.0 : -1.0,
                       std::to_string(cases) + " random instances, exact comparison"};
}

/// Jacobian and KL-gradient finite-difference oracles plus eNTK structure.
inline CheckList check_jacobian_oracles(std::size_t cases, std::uint64_t seed) {
    const ModelSpec spec{2, {16}, 3, Activation::Tanh};
    CounterRng rng(RngSeed{seed});
    const double h = 1e-5;
    double worst_jac = 0.0;
    double worst_klg = 0.0;
    double worst_psd = kInfinity;
    double worst_trace = 0.0;
    for (std::size_t c = 0; c < cases; ++c) {
        ParamVector params = init_params(spec, RngSeed{rng.next_u64()});
        const std::vector<double> x = verify_detail::rand_x(rng, 2);
        const Pmf q = verify_detail::rand_pmf(rng, 3);
        const JacobianMatrix jac = jacobian(spec, params, x);
        double jmax = 0.0;
        for (double v : jac.data) jmax = std::max(jmax, std::abs(v));

        for (std::size_t j = 0; j < jac.cols; ++j) {
            const double saved = params.theta[j];
            params.theta[j] = saved + h;
            const Logits fp = forward(spec, params, x);
            params.theta[j] = saved - h;
            const Logits fm = forward(spec, params, x);
            params.theta[j] = saved;
            for (std::size_t i = 0; i < jac.rows; ++i) {
                const double fd = (fp.values[i] - fm.values[i]) / (2.0 * h);
                worst_jac = std::max(worst_jac, std::abs(fd - jac(i, j)) / jmax);
            }
        }

        const std::vector<double> grad = kl_grad(spec, params, x, q);
        double gmax = 0.0;
        for (double v : grad) gmax = std::max(gmax, std::abs(v));
        auto kl_at = [&](ParamVector& t) { return detail::kl_unchecked(q.probs, predictive(spec, t, x).probs); };
        for (std::size_t j = 0; j < grad.size(); ++j) {
            const double saved = params.theta[j];
            params.theta[j] = saved + h;
            const double dp = kl_at(params);
            params.theta[j] = saved - h;
            const double dm = kl_at(params);
            params.theta[j] = saved;
            // The gradient of D_KL(q||p) w.r.t. theta is J^T(p - q).
            const double fd = (dp - dm) / (2.0 * h);
            worst_klg = std::max(worst_klg, std::abs(fd + grad[j]) / std::max(gmax, 1e-6));
        }

        const EntkMatrix kernel = entk(spec, params, x);
        const auto eig = linalg::sym_eigenvalues(kernel.gram);
        worst_psd = std::min(worst_psd, eig.front());
        const double fro = linalg::frobenius_norm_sq(jac);
        worst_trace = std::max(worst_trace, std::abs(linalg::trace(kernel.gram) - fro) / std::max(1.0, fro));
    }
    CheckList out;
    out.push_back(CheckResult{"jacobian_fd", worst_jac <= 1e-6, 1e-6 - worst_jac,
                              "max relative FD error = " + verify_detail::fmt(worst_jac)});
    out.push_back(CheckResult{"kl_grad_fd", worst_klg <= 1e-6, 1e-6 - worst_klg,
                              "max relative FD error = " + verify_detail::fmt(worst_klg)});
    out.push_back(CheckResult{"entk_psd", worst_psd >= -1e-10, worst_psd + 1e-10,
                              "min eigenvalue = " + verify_detail::fmt(worst_psd)});
    out.push_back(CheckResult{"entk_trace_identity", worst_trace <= 1e-10, 1e-10 - worst_trace,
                              "max relative trace error = " + verify_detail::fmt(worst_trace)});
    return out;
}

// ---------------------------------------------------------------------------
// Complexity / generalization checks
// ---------------------------------------------------------------------------

/// Monte-Carlo tail of the generalization bound on the 6-cell toy, with
/// Wilson-interval slack, plus the Markov step checked on its own.
inline CheckList check_gen_tail_bound(std::uint64_t trials, unsigned jobs, std::uint64_t seed) {
    const Pmf q_bar = Pmf::uniform(6);
    CounterRng rng(RngSeed{seed}, 777);
    std::vector<double> loss(6);
    double lmax = 0.0;
    for (double& v : loss) {
        v = rng.next_double();
        lmax = std::max(lmax, v);
    }
    for (double& v : loss) v /= lmax;  // sup attained, L = 1
    const std::vector<double> eps{0.05, 0.1, 0.2, 0.4};
    const GenBoundReport rep = verify_gen_bound(q_bar, 50, loss, 1.0, eps, trials, RngSeed{seed}, jobs);

    double worst_tail = kInfinity;
    double worst_markov = kInfinity;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double slack = 3.0 * wilson_half_width(rep.empirical_tail[i] * static_cast<double>(rep.trials),
                                                     static_cast<double>(rep.trials));
        worst_tail = std::min(worst_tail, rep.bound_values[i] + slack - rep.empirical_tail[i]);
        worst_markov = std::min(worst_markov, rep.mean_kl / rep.markov_t_grid[i] - rep.markov_tail[i]);
    }
    CheckList out;
    out.push_back(CheckResult{"gen_tail_bound", worst_tail >= 0.0, worst_tail,
                              std::to_string(trials) + " trials, min bound+slack-tail = " +
                                  verify_detail::fmt(worst_tail)});
    out.push_back(CheckResult{"markov_step", worst_markov >= -1e-15, worst_markov,
                              "min mean/t - tail = " + verify_detail::fmt(worst_markov)});
    return out;
}

/// MC estimator against the digamma closed form, the frozen two-symbol
/// value, and the Jensen lower bound, over random posteriors.
inline CheckList check_complexity_oracle(std::size_t num_specs, std::uint64_t samples, unsigned jobs,
                                         std::uint64_t seed) {
    CounterRng rng(RngSeed{seed}, 31);
    double worst_agree = kInfinity;
    double worst_lb = kInfinity;
    double worst_mean_lb = kInfinity;
    for (std::size_t s = 0; s < num_specs; ++s) {
        const std::size_t k = 2 + rng.next_below(7);
        const std::uint64_t n = 20 + rng.next_below(181);
        const Pmf source = verify_detail::rand_pmf(rng, k);
        std::vector<std::uint64_t> counts = multinomial_counts(source, n, rng);
        PosteriorSpec spec;
        spec.counts = std::move(counts);
        spec.n = n;
        spec.prior_alpha.assign(k, 0.5 + 1.5 * rng.next_double());
        const ComplexityEstimate est = estimate_complexity(spec, samples, RngSeed{seed ^ (s + 1)}, jobs);
        worst_agree = std::min(worst_agree, 4.0 * est.std_error - std::abs(est.mean - est.closed_form));
        const double lb = complexity_lower_bound(spec);
        worst_lb = std::min(worst_lb, est.closed_form - lb);
        worst_mean_lb = std::min(worst_mean_lb, est.mean - (lb - 4.0 * est.std_error));
    }
    const PosteriorSpec frozen = PosteriorSpec::symmetric(1.0, {5, 5});
    const double frozen_err = std::abs(complexity_closed_form(frozen) - 0.021698);

    CheckList out;
    out.push_back(CheckResult{"complexity_mc_agreement", worst_agree >= 0.0, worst_agree,
                              std::to_string(num_specs) + " posteriors x " + std::to_string(samples) +
                                  " samples, min 4SE - |mc-exact| = " + verify_detail::fmt(worst_agree)});
    out.push_back(CheckResult{"complexity_lower_bound", worst_lb >= -1e-12, worst_lb + 1e-12,
                              "min closed_form - lb = " + verify_detail::fmt(worst_lb)});
    out.push_back(CheckResult{"complexity_mean_above_lb", worst_mean_lb >= 0.0, worst_mean_lb,
                              "min mc - (lb - 4SE) = " + verify_detail::fmt(worst_mean_lb)});
    out.push_back(CheckResult{"complexity_frozen_value", frozen_err <= 1e-6, 1e-6 - frozen_err,
                              "|closed_form(5,5) - 0.021698| = " + verify_detail::fmt(frozen_err)});
    return out;
}

/// Closed form strictly decreasing in n at fixed q, vanishing at the tail.
inline CheckResult check_complexity_asymptotics() {
    double prev = kInfinity;
    double last = 0.0;
    bool decreasing = true;
    for (int i = 0; i <= 10; ++i) {
        const std::uint64_t n = 10ULL << i;
        const double c = complexity_closed_form(PosteriorSpec::symmetric(1.0, {n / 2, n / 2}));
        if (!(c < prev)) decreasing = false;
        prev = c;
        last = c;
    }
    const bool passed = decreasing && last < 1e-4;
    return CheckResult{"complexity_asymptotics", passed, 1e-4 - last,
                       std::string(decreasing ? "strictly decreasing" : "NOT decreasing") +
                           ", final value = " + verify_detail::fmt(last)};
}

/// Uniform counts minimize the closed form among k=2 (exhaustive) and
/// k=4 (random) compositions.
inline CheckResult check_uniformity_ordering(std::uint64_t seed) {
    const UniformityReport r2 = uniformity_ordering_check(20, 2, RngSeed{seed});
    const UniformityReport r4 = uniformity_ordering_check(20, 4, RngSeed{seed}, 50);
    const double margin =
        std::min(r2.min_other - r2.uniform_complexity, r4.min_other - r4.uniform_complexity);
    const bool passed = r2.uniform_is_min && r4.uniform_is_min;
    return CheckResult{"uniformity_ordering", passed, margin,
                       "k=2 margin = " + verify_detail::fmt(r2.min_other - r2.uniform_complexity) +
                           ", k=4 margin = " + verify_detail::fmt(r4.min_other - r4.uniform_complexity)};
}

/// Majorization monotonicity of the closed form over exhaustive k=2,3
/// compositions with n <= 20 and the uniform Dirichlet prior.
inline CheckResult check_majorization_ordering() {
    double worst = kInfinity;
    for (std::uint64_t n = 2; n <= 20; ++n) {
        std::vector<std::vector<std::uint64_t>> comps;
        for (std::uint64_t a = 0; a <= n; ++a) comps.push_back({a, n - a});
        for (std::size_t i = 0; i < comps.size(); ++i)
            for (std::size_t j = 0; j < comps.size(); ++j) {
                if (i == j) continue;
                if (verify_detail::majorizes(comps[i], comps[j]))
                    worst = std::min(worst, complexity_closed_form(PosteriorSpec::symmetric(1.0, comps[i])) -
                                                complexity_closed_form(PosteriorSpec::symmetric(1.0, comps[j])));
            }
    }
    for (std::uint64_t n = 3; n <= 20; ++n) {
        std::vector<std::vector<std::uint64_t>> comps;
        for (std::uint64_t a = 0; a <= n; ++a)
            for (std::uint64_t b = 0; a + b <= n; ++b) comps.push_back({a, b, n - a - b});
        for (std::size_t i = 0; i < comps.size(); ++i)
            for (std::size_t j = 0; j < comps.size(); ++j) {
                if (i == j) continue;
                if (verify_detail::majorizes(comps[i], comps[j]))
                    worst = std::min(worst, complexity_closed_form(PosteriorSpec::symmetric(1.0, comps[i])) -
                                                complexity_closed_form(PosteriorSpec::symmetric(1.0, comps[j])));
            }
    }
    return CheckResult{"majorization_ordering", worst >= -1e-12, worst + 1e-12,
                       "min C(a) - C(b) over majorizing pairs = " + verify_detail::fmt(worst)};
}

// ---------------------------------------------------------------------------
// Expected-risk assembly checks
// ---------------------------------------------------------------------------

/// Triangle step |R(q_bar) - R(p)| <= gen + fit on toy instances.
inline CheckResult check_triangle_inequality(std::size_t cases, std::uint64_t seed) {
    const JointPmf joint = verify_detail::toy_joint();
    const Pmf flat = joint.flatten();
    const ModelSpec spec{2, {4}, 2, Activation::Tanh};
    const LossSpec loss = LossSpec::zero_one();
    CounterRng rng(RngSeed{seed}, 5);
    double worst = kInfinity;
    for (std::size_t c = 0; c < cases; ++c) {
        const ParamVector params = init_params(spec, RngSeed{rng.next_u64()});
        const std::vector<std::uint64_t> counts = multinomial_counts(flat, 50, rng);
        Dataset ds;
        try {
            ds = detail::dataset_from_joint_counts(joint, counts, 50);
        } catch (const std::invalid_argument&) {
            continue;  // a grid point drew zero samples in a way that broke grouping
        }
        const double r_ext = risk(spec, params, ds, ConditionalSource::ExternalQBar, loss, &joint);
        const double r_model = risk(spec, params, ds, ConditionalSource::ModelP, loss);
        const double fit = std::abs(risk(spec, params, ds, ConditionalSource::ModelP, loss) -
                                    risk(spec, params, ds, ConditionalSource::EmpiricalQ, loss));
        const double gen = gen_error(spec, params, ds, joint, loss);
        worst = std::min(worst, gen + fit - std::abs(r_ext - r_model));
    }
    return CheckResult{"triangle_inequality", worst >= -1e-12, worst + 1e-12,
                       "min gen + fit - |R(qbar)-R(p)| = " + verify_detail::fmt(worst)};
}

/// Coverage of the assembled bound: over resampled datasets the true risk
/// stays below total_bound in at least a 1 - delta fraction of trials.
inline CheckResult check_risk_coverage(std::uint64_t trials, std::uint64_t seed) {
    const JointPmf joint = verify_detail::toy_joint();
    const Pmf flat = joint.flatten();
    const ModelSpec spec{2, {4}, 2, Activation::Tanh};
    const ParamVector params = init_params(spec, RngSeed{seed});
    const LossSpec loss = LossSpec::zero_one();
    const double delta = 0.1;
    const std::uint64_t n = 50;

    Dataset full;  // every grid point, for the fixed true risk
    for (std::size_t g = 0; g < joint.features.size(); ++g)
        full.entries.push_back(Dataset::Entry{joint.features[g], Pmf::uniform(2), 1.0 / 3.0});
    const double true_risk = risk(spec, params, full, ConditionalSource::ExternalQBar, loss, &joint);

    std::uint64_t covered = 0;
    std::uint64_t valid = 0;
    CounterRng rng(RngSeed{seed}, 99);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const std::vector<std::uint64_t> counts = multinomial_counts(flat, n, rng);
        Dataset ds;
        try {
            ds = detail::dataset_from_joint_counts(joint, counts, n);
        } catch (const std::invalid_argument&) {
            continue;
        }
        PosteriorSpec post;
        post.counts = counts;
        post.n = n;
        post.prior_alpha.assign(counts.size(), 1.0);
        const RiskBoundReport rep = expected_risk_bound(spec, params, ds, post, delta, loss);
        ++valid;
        if (true_risk <= rep.total_bound) ++covered;
    }
    const double coverage = static_cast<double>(covered) / static_cast<double>(valid);
    return CheckResult{"risk_coverage", coverage >= 1.0 - delta, coverage - (1.0 - delta),
                       "coverage = " + verify_detail::fmt(coverage) + " over " + std::to_string(valid) +
                           " resampled datasets (target 0.9)"};
}

// ---------------------------------------------------------------------------
// Hessian machinery
// ---------------------------------------------------------------------------

inline CheckList check_hessian_machinery(std::size_t instances, std::uint64_t seed) {
    CounterRng rng(RngSeed{seed}, 17);
    double worst_b = kInfinity;
    for (std::size_t c = 0; c < instances; ++c) {
        const ModelSpec spec{2, {4}, 2, Activation::Tanh};
        const ParamVector params = init_params(spec, RngSeed{rng.next_u64()});
        const Dataset ds = verify_detail::rand_dataset(rng, 3, 2, 2);
        const HessianCheck chk = hessian_check(spec, params, ds);
        worst_b = std::min(worst_b, chk.entk_lambda_max_max - chk.b_lambda_max_max);
    }

    // One larger model for the full decomposition residual.
    const ModelSpec big{4, {16}, 4, Activation::Tanh};
    const ParamVector params = init_params(big, RngSeed{seed ^ 0xabcdef});
    const Dataset ds = verify_detail::rand_dataset(rng, 4, 4, 4);
    const HessianCheck chk = hessian_check(big, params, ds);
    const double rel = chk.decomposition_residual / std::max(chk.fd_frobenius, 1e-12);

    CheckList out;
    out.push_back(CheckResult{"b_lambda_vs_entk", worst_b >= -1e-9, worst_b + 1e-9,
                              "min lambda_max(eNTK) - lambda_max(B_x) over " + std::to_string(instances) +
                                  " instances = " + verify_detail::fmt(worst_b)});
    out.push_back(CheckResult{"hessian_decomposition", rel <= 1e-3, 1e-3 - rel,
                              "m = " + std::to_string(big.param_count()) +
                                  ", relative assembly residual = " + verify_detail::fmt(rel) +
                                  (chk.side_conditions_hold()
                                       ? ", side conditions hold: lambda_max(H) <= max eNTK asserted"
                                       : ", side conditions not met (reported only): ||J^T q||max = " +
                                             verify_detail::fmt(chk.side_grad_norm_max) +
                                             ", ||E C_x||_F = " + verify_detail::fmt(chk.side_c_norm))});
    if (chk.side_conditions_hold()) {
        const double slack = chk.entk_lambda_max_max - chk.fd_lambda_max;
        out.push_back(CheckResult{"hessian_entk_domination", slack >= -1e-6, slack,
                                  "lambda_max(H_fd) <= max_x lambda_max(eNTK) slack = " + verify_detail::fmt(slack)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Workflow replication
// ---------------------------------------------------------------------------

/// Full training workflow at toy scale: per-epoch identity and fitting
/// bound, reproducibility, and reported (not asserted) correlations.
inline CheckList check_workflow_replication(const std::vector<std::uint64_t>& seeds, const ModelSpec& model_spec,
                                            const TrainConfig& config, const SyntheticDataSpec& data_spec) {
    CheckList out;
    for (std::uint64_t s : seeds) {
        const ExperimentResult run = run_correlation_experiment(model_spec, config, data_spec, RngSeed{s});
        double worst_identity = kInfinity;
        double worst_bound = kInfinity;
        for (const auto& rec : run.records) {
            const double rel =
                std::abs(rec.mean_f + rec.mean_g - rec.mean_residual_sq) / std::max(rec.mean_residual_sq, 1e-15);
            worst_identity = std::min(worst_identity, 1e-9 - rel);
            worst_bound = std::min(worst_bound, std::sqrt(rec.mean_f + rec.mean_g) + 1e-9 - rec.fit_normalized);
        }
        const ExperimentResult rerun = run_correlation_experiment(model_spec, config, data_spec, RngSeed{s});
        bool reproducible = run.records.size() == rerun.records.size();
        if (reproducible)
            for (std::size_t i = 0; i < run.records.size(); ++i) {
                const auto& a = run.records[i];
                const auto& b = rerun.records[i];
                if (a.train_loss != b.train_loss || a.test_accuracy != b.test_accuracy || a.mean_f != b.mean_f ||
                    a.mean_g != b.mean_g || a.lambda_max_max != b.lambda_max_max)
                    reproducible = false;
            }
        const bool passed = !run.diverged && run.records.size() == config.epochs && worst_identity >= 0.0 &&
                            worst_bound >= 0.0 && reproducible;
        std::string detail = "epochs = " + std::to_string(run.records.size());
        detail += run.report.stable ? ", stabilized at " + std::to_string(run.report.stabilized_at)
                                    : ", never stabilized (flagged)";
        detail += ", r(acc, E[F]) = " + (run.report.r_f_defined ? verify_detail::fmt(run.report.r_accuracy_f)
                                                                : std::string("undefined"));
        detail += ", r(acc, E[G]) = " + (run.report.r_g_defined ? verify_detail::fmt(run.report.r_accuracy_g)
                                                                : std::string("undefined"));
        detail += reproducible ? ", rerun identical" : ", rerun DIFFERS";
        out.push_back(
            CheckResult{"workflow_seed_" + std::to_string(s), passed, std::min(worst_identity, worst_bound), detail});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

inline CheckList run_lemmas_suite(const VerifyOptions& opt) {
    CheckList out;
    out.push_back(check_markov_inequality(20000, opt.seed));
    out.push_back(check_pinsker_gap(10000, opt.seed + 1));
    out.push_back(check_pinsker_inequality(10000, opt.seed + 2));
    out.push_back(check_kl_nonnegativity(10000, opt.seed + 3));
    out.push_back(check_lagrange_identity(1000, opt.seed + 4));
    out.push_back(check_eigenvalue_lemmas(100, opt.seed + 5));
    return out;
}

inline CheckList run_gen_bound_suite(const VerifyOptions& opt) {
    CheckList out;
    const std::uint64_t trials = opt.trials.value_or(100000);
    const std::uint64_t samples = opt.trials.value_or(100000);
    for (auto& r : check_gen_tail_bound(trials, opt.jobs, opt.seed)) out.push_back(std::move(r));
    for (auto& r : check_complexity_oracle(50, samples, opt.jobs, opt.seed + 1)) out.push_back(std::move(r));
    out.push_back(check_complexity_asymptotics());
    out.push_back(check_uniformity_ordering(opt.seed + 2));
    out.push_back(check_majorization_ordering());
    out.push_back(check_triangle_inequality(200, opt.seed + 3));
    out.push_back(check_risk_coverage(opt.trials.value_or(10000), opt.seed + 4));
    if (opt.trials && *opt.trials < 1000)
        out.push_back(CheckResult{"low_trials_warning", true, 0.0,
                                  "trial override below 1000; tail estimates unreliable"});
    return out;
}

inline CheckList run_fit_bound_suite(const VerifyOptions& opt) {
    CheckList out;
    out.push_back(check_decomposition_identity(1000, opt.seed));
    for (auto& r : check_fitting_bound(50, opt.seed + 1)) out.push_back(std::move(r));
    out.push_back(check_f_term_entk_bound(200, opt.seed + 2));
    out.push_back(check_g_min_monotonic(20, opt.seed + 3));
    for (auto& r : check_jacobian_oracles(20, opt.seed + 4)) out.push_back(std::move(r));
    return out;
}

inline CheckList run_hessian_suite(const VerifyOptions& opt) { return check_hessian_machinery(20, opt.seed); }

inline CheckList run_suite(const std::string& name, const VerifyOptions& opt) {
    if (name == "lemmas") return run_lemmas_suite(opt);
    if (name == "gen_bound") return run_gen_bound_suite(opt);
    if (name == "fit_bound") return run_fit_bound_suite(opt);
    if (name == "hessian") return run_hessian_suite(opt);
    if (name == "all") {
        CheckList out = run_lemmas_suite(opt);
        for (auto& r : run_gen_bound_suite(opt)) out.push_back(std::move(r));
        for (auto& r : run_fit_bound_suite(opt)) out.push_back(std::move(r));
        for (auto& r : run_hessian_suite(opt)) out.push_back(std::move(r));
        return out;
    }
    throw std::invalid_argument("unknown verify suite: " + name);
}

}  // namespace riskbounds
