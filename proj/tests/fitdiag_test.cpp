// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <doctest.h>

#include <cmath>
#include <vector>

#include "riskbounds/fitdiag.hpp"
#include "riskbounds/verify.hpp"

using namespace riskbounds;

TEST_SUITE("fitdiag") {

TEST_CASE("cross_norm_sq: parallel vectors, hand expansions, identity form") {
    CHECK(cross_norm_sq({2.0, 4.0}, {1.0, 2.0}) == 0.0);
    CHECK(cross_norm_sq({1.0, 0.0}, {3.0, 4.0}) == doctest::Approx(16.0).epsilon(1e-15));
    CHECK(cross_norm_sq({0.0, 1.0}, {3.0, 4.0}) == doctest::Approx(9.0).epsilon(1e-15));

    CounterRng rng(RngSeed{3});
    for (int c = 0; c < 200; ++c) {
        const std::size_t k = 2 + rng.next_below(8);
        std::vector<double> a(k);
        std::vector<double> x(k);
        for (double& v : a) v = rng.normal();
        for (double& v : x) v = rng.normal();
        const double direct = cross_norm_sq(a, x);
        const double viaid = linalg::norm_sq(a) * linalg::norm_sq(x) - linalg::dot(a, x) * linalg::dot(a, x);
        CHECK(direct == doctest::Approx(viaid).epsilon(1e-9));
        CHECK(direct >= 0.0);
    }
    CHECK_THROWS_AS(cross_norm_sq({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("lagrange identity: worked 2x2 case, zero vector, random sweep") {
    linalg::Matrix eye = linalg::Matrix::identity(2);
    CHECK(lagrange_identity_residual(eye, {3.0, 4.0}) == 0.0);
    CHECK(lagrange_identity_residual(eye, {0.0, 0.0}) == 0.0);

    const CheckResult sweep = check_lagrange_identity(100, 5);
    INFO(sweep.detail);
    CHECK(sweep.passed);
}

TEST_CASE("decompose: exact zero at the minimizer") {
    const ModelSpec spec{2, {4}, 3, Activation::Tanh};
    const ParamVector params = init_params(spec, RngSeed{7});
    const std::vector<double> x{0.3, 0.6};
    const Pmf q = predictive(spec, params, x);
    const FitDecomposition d = decompose(spec, params, x, q);
    CHECK(d.residual_sq == 0.0);
    CHECK(d.f_term == 0.0);
    CHECK(d.g_term == 0.0);
}

TEST_CASE("decompose: hand-computed single-parameter split on a linear toy") {
    // Linear 1 -> 2 model; weight w00 has gradient column (x0, 0).
    const ModelSpec spec{1, {}, 2, Activation::Identity};
    ParamVector params;
    params.theta = {0.8, -0.3, 0.2, -0.1};  // w00, w10, b0, b1
    const std::vector<double> x{1.7};
    const Pmf q({0.9, 0.1});
    const Pmf p = predictive(spec, params, x);
    const double d0 = q.probs[0] - p.probs[0];
    const double d1 = q.probs[1] - p.probs[1];

    const FitDecomposition dec = decompose(spec, params, x, q);
    CHECK(dec.residual_sq == doctest::Approx(d0 * d0 + d1 * d1).epsilon(1e-14));
    // Column 0 is (x0, 0): F_0 = d0^2 and G_0 = d1^2 after the norm cancels.
    CHECK(dec.per_param_f[0] == doctest::Approx(d0 * d0).epsilon(1e-12));
    CHECK(dec.per_param_g[0] == doctest::Approx(d1 * d1).epsilon(1e-12));
    CHECK(dec.per_param_f[0] + dec.per_param_g[0] == doctest::Approx(dec.residual_sq).epsilon(1e-12));
    // Bias columns are unit vectors: same split.
    CHECK(dec.per_param_f[2] + dec.per_param_g[2] == doctest::Approx(dec.residual_sq).epsilon(1e-12));
    CHECK(dec.zero_grad_params.empty());
}

TEST_CASE("decompose: totals and per-parameter identity on random instances") {
    const ModelSpec spec{2, {8}, 3, Activation::Tanh};
    CounterRng rng(RngSeed{11});
    for (int c = 0; c < 50; ++c) {
        const ParamVector params = init_params(spec, RngSeed{rng.next_u64()});
        const std::vector<double> x{rng.normal(), rng.normal()};
        const Pmf q = sample_dirichlet({1.0, 1.0, 1.0}, rng);
        const FitDecomposition d = decompose(spec, params, x, q);
        CHECK(d.f_term >= 0.0);
        CHECK(d.g_term >= 0.0);
        CHECK(std::abs(d.f_term + d.g_term - d.residual_sq) <= 1e-9 * d.residual_sq);
        for (std::size_t j = 0; j < d.per_param_f.size(); ++j) {
            if (std::isnan(d.per_param_f[j])) continue;
            CHECK(d.per_param_f[j] >= 0.0);
            CHECK(d.per_param_g[j] >= 0.0);
            CHECK(std::abs(d.per_param_f[j] + d.per_param_g[j] - d.residual_sq) <= 1e-9 * d.residual_sq);
        }
    }
}

TEST_CASE("fit_report: perfect fit, single-input hand value, bound sweep") {
    const ModelSpec spec{2, {4}, 3, Activation::Tanh};
    const ParamVector params = init_params(spec, RngSeed{13});
    const LossSpec sce = LossSpec::softmax_cross_entropy();

    SUBCASE("model matching empirical conditionals everywhere") {
        Dataset ds;
        CounterRng rng(RngSeed{17});
        const Pmf w = sample_dirichlet({1.0, 1.0, 1.0}, rng);
        for (int i = 0; i < 3; ++i) {
            const std::vector<double> x{rng.normal(), rng.normal()};
            ds.entries.push_back(Dataset::Entry{x, predictive(spec, params, x), w.probs[i]});
        }
        const FitReport rep = fit_report(spec, params, ds, sce);
        CHECK(rep.fit == 0.0);
        CHECK(rep.fit_normalized == 0.0);
        CHECK(rep.fit_normalized <= rep.bound);
    }

    SUBCASE("single input reduces to |(p-q)^T l|") {
        Dataset ds;
        const std::vector<double> x{0.4, -0.9};
        const Pmf q({0.2, 0.5, 0.3});
        ds.entries.push_back(Dataset::Entry{x, q, 1.0});
        const Logits f = forward(spec, params, x);
        const Pmf p = softmax(f).pmf;
        const std::vector<double> lvec = loss_vector(sce, f);
        double expected = 0.0;
        for (std::size_t y = 0; y < 3; ++y) expected += (p.probs[y] - q.probs[y]) * lvec[y];
        const FitReport rep = fit_report(spec, params, ds, sce);
        CHECK(rep.fit == doctest::Approx(std::abs(expected)).epsilon(1e-14));
    }

    SUBCASE("Theorem-level bound on random pairs") {
        const CheckList checks = check_fitting_bound(20, 19);
        for (const auto& c : checks) {
            INFO(c.name, ": ", c.detail);
            CHECK(c.passed);
        }
    }
}

TEST_CASE("fit_report rows and the degenerate-loss error") {
    const ModelSpec spec{2, {4}, 3, Activation::Tanh};
    const ParamVector params = init_params(spec, RngSeed{23});
    CounterRng rng(RngSeed{29});
    const Dataset ds = verify_detail::rand_dataset(rng, 5, 2, 3);
    std::vector<InputDiagnostic> rows;
    const FitReport rep = fit_report(spec, params, ds, LossSpec::softmax_cross_entropy(), &rows);
    CHECK(rows.size() == ds.entries.size());
    double mean_f = 0.0;
    double mean_g = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        mean_f += ds.entries[i].weight * rows[i].f_term;
        mean_g += ds.entries[i].weight * rows[i].g_term;
        CHECK(rows[i].lambda_max <= rep.lambda_max_max + 1e-12);
    }
    CHECK(rep.bound == doctest::Approx(std::sqrt(mean_f + mean_g)).epsilon(1e-12));
    CHECK(rep.fit ==
          doctest::Approx(rep.fit_normalized * std::sqrt(rep.loss_l2_mean)).epsilon(1e-9));

    // A single-class task makes the zero-one loss vector identically zero.
    const ModelSpec one{2, {}, 1, Activation::Identity};
    ParamVector p1;
    p1.theta.assign(one.param_count(), 0.1);
    Dataset degenerate;
    degenerate.entries.push_back(Dataset::Entry{{0.0, 0.0}, Pmf({1.0}), 1.0});
    CHECK_THROWS_AS(fit_report(one, p1, degenerate, LossSpec::zero_one()), std::runtime_error);
}

TEST_CASE("cauchy_schwarz_gap: vanishing and constant-loss cases, sweep") {
    const ModelSpec spec{2, {4}, 3, Activation::Tanh};
    const ParamVector params = init_params(spec, RngSeed{31});
    CounterRng rng(RngSeed{37});

    Dataset perfect;
    for (int i = 0; i < 2; ++i) {
        const std::vector<double> x{rng.normal(), rng.normal()};
        perfect.entries.push_back(Dataset::Entry{x, predictive(spec, params, x), 0.5});
    }
    CHECK(cauchy_schwarz_gap(perfect, spec, params, LossSpec::softmax_cross_entropy()) == 0.0);

    // A tiny clip level makes every loss vector the constant (c, c, c),
    // so fit vanishes and the gap equals the product term.
    const Dataset ds = verify_detail::rand_dataset(rng, 4, 2, 3);
    const double clip = 1e-3;
    const double gap = cauchy_schwarz_gap(ds, spec, params, LossSpec::clipped_cross_entropy(clip));
    CHECK(gap >= 0.0);
    double mean_r2 = 0.0;
    for (const auto& e : ds.entries) {
        const Pmf p = predictive(spec, params, e.x);
        for (std::size_t y = 0; y < 3; ++y) {
            const double d = e.q_yx.probs[y] - p.probs[y];
            mean_r2 += e.weight * d * d;
        }
    }
    CHECK(gap == doctest::Approx(std::sqrt(mean_r2 * 3.0 * clip * clip)).epsilon(1e-9));

    for (int c = 0; c < 20; ++c) {
        const Dataset sweep_ds = verify_detail::rand_dataset(rng, 3, 2, 3);
        const ParamVector sweep_p = init_params(spec, RngSeed{rng.next_u64()});
        CHECK(cauchy_schwarz_gap(sweep_ds, spec, sweep_p, LossSpec::softmax_cross_entropy()) >= -1e-12);
    }
}

TEST_CASE("f_term bound gap: q = p case and random sweep") {
    const ModelSpec spec{2, {4}, 3, Activation::Tanh};
    const ParamVector params = init_params(spec, RngSeed{41});
    const std::vector<double> x{0.2, 0.8};
    CHECK(f_term_entk_bound_gap(spec, params, x, predictive(spec, params, x)) == 0.0);
    const CheckResult sweep = check_f_term_entk_bound(50, 43);
    INFO(sweep.detail);
    CHECK(sweep.passed);
}

TEST_CASE("g_min_monotonicity: prefix semantics and validation") {
    const ModelSpec spec{2, {4}, 3, Activation::Tanh};
    const ParamVector params = init_params(spec, RngSeed{47});
    CounterRng rng(RngSeed{53});
    const Dataset ds = verify_detail::rand_dataset(rng, 4, 2, 3);
    const std::size_t m = spec.param_count();

    const std::vector<double> gm = g_min_monotonicity(spec, params, ds, {1, m / 2, m});
    // k = 1 equals the first parameter's expectation.
    double mean_g0 = 0.0;
    for (const auto& e : ds.entries) mean_g0 += e.weight * decompose(spec, params, e.x, e.q_yx).per_param_g[0];
    CHECK(gm[0] == doctest::Approx(mean_g0).epsilon(1e-12));
    for (std::size_t i = 1; i < gm.size(); ++i) CHECK(gm[i] <= gm[i - 1]);

    CHECK_THROWS_AS(g_min_monotonicity(spec, params, ds, {1, m + 1}), std::invalid_argument);
    CHECK_THROWS_AS(g_min_monotonicity(spec, params, ds, {5, 5}), std::invalid_argument);

    const CheckResult sweep = check_g_min_monotonic(10, 59);
    CHECK(sweep.passed);
}

TEST_CASE("hessian_check: one-hot conditionals give a rank-1 B_x") {
    const ModelSpec spec{2, {3}, 2, Activation::Tanh};
    const ParamVector params = init_params(spec, RngSeed{61});
    Dataset ds;
    ds.entries.push_back(Dataset::Entry{{0.4, -0.2}, Pmf({1.0, 0.0}), 0.5});
    ds.entries.push_back(Dataset::Entry{{-0.7, 0.1}, Pmf({0.0, 1.0}), 0.5});
    const HessianCheck chk = hessian_check(spec, params, ds);
    CHECK(chk.b_lambda_max_max <= chk.entk_lambda_max_max + 1e-9);

    // Rank-1 weighted Gram: lambda_max(B_x) equals the one-hot row's squared norm.
    const JacobianMatrix jac = jacobian(spec, params, ds.entries[0].x);
    double row0 = 0.0;
    for (std::size_t j = 0; j < jac.cols; ++j) row0 += jac(0, j) * jac(0, j);
    linalg::Matrix w(2, 2);
    w(0, 0) = row0;  // sqrt(q) J J^T sqrt(q) with q = (1, 0)
    CHECK(linalg::sym_lambda_max(w) == doctest::Approx(row0).epsilon(1e-12));
    CHECK(row0 <= entk_lambda_max(spec, params, ds.entries[0].x) + 1e-9);
}

TEST_CASE("hessian_check: assembly residual stays small, including at q = p") {
    const ModelSpec spec{2, {}, 2, Activation::Identity};
    const ParamVector params = init_params(spec, RngSeed{67});
    Dataset ds;
    CounterRng rng(RngSeed{71});
    for (int i = 0; i < 2; ++i) {
        const std::vector<double> x{rng.normal(), rng.normal()};
        ds.entries.push_back(Dataset::Entry{x, predictive(spec, params, x), 0.5});  // q = p: stationary
    }
    const HessianCheck chk = hessian_check(spec, params, ds);
    CHECK(chk.decomposition_residual / std::max(chk.fd_frobenius, 1e-12) <= 1e-3);
    CHECK(chk.b_lambda_max_max <= chk.entk_lambda_max_max + 1e-9);
    CHECK(chk.symmetry_residual <= 1e-4);

    const CheckList sweep = check_hessian_machinery(5, 73);
    for (const auto& c : sweep) {
        INFO(c.name, ": ", c.detail);
        CHECK(c.passed);
    }
}

TEST_CASE("hessian_check rejects models beyond the dense cap") {
    const ModelSpec big{10, {40, 40}, 10, Activation::Tanh};  // m > 500
    ParamVector p;
    p.theta.assign(big.param_count(), 0.0);
    Dataset ds;
    ds.entries.push_back(Dataset::Entry{std::vector<double>(10, 0.0), Pmf::uniform(10), 1.0});
    CHECK_THROWS_AS(hessian_check(big, p, ds), std::invalid_argument);
}

}  // TEST_SUITE
