// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <doctest.h>

#include <cmath>
#include <vector>

#include "riskbounds/model.hpp"
#include "riskbounds/verify.hpp"

using namespace riskbounds;

namespace {

const ModelSpec kLinear23{2, {}, 3, Activation::Identity};  // f = Wx + b, m = 9

ParamVector zeros(const ModelSpec& spec) {
    ParamVector p;
    p.theta.assign(spec.param_count(), 0.0);
    return p;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("parameter counts follow the layer chain") {
    CHECK(kLinear23.param_count() == 9);
    const ModelSpec mlp{2, {16}, 3, Activation::Tanh};
    CHECK(mlp.param_count() == (2 + 1) * 16 + (16 + 1) * 3);
}

TEST_CASE("forward: zero weights, linear entrywise, identity-activation hand case") {
    const Logits z = forward(kLinear23, zeros(kLinear23), {0.4, -0.2});
    for (double v : z.values) CHECK(v == 0.0);

    // Linear model reproduces W x + b entrywise.
    ParamVector p = zeros(kLinear23);
    const double w[3][2] = {{1.0, -2.0}, {0.5, 0.25}, {-1.5, 3.0}};
    const double b[3] = {0.1, -0.2, 0.3};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) p.theta[i * 2 + j] = w[i][j];
    for (int i = 0; i < 3; ++i) p.theta[6 + i] = b[i];
    const std::vector<double> x{0.3, -0.7};
    const Logits f = forward(kLinear23, p, x);
    for (int i = 0; i < 3; ++i)
        CHECK(f.values[i] == doctest::Approx(w[i][0] * x[0] + w[i][1] * x[1] + b[i]).epsilon(1e-15));

    // Single identity hidden layer: f = W2 (W1 x + b1) + b2.
    const ModelSpec deep{2, {2}, 2, Activation::Identity};
    ParamVector q;
    q.theta = {1.0, 2.0, 3.0, 4.0, 0.5, -0.5,    // W1 rows, b1
               1.0, -1.0, 2.0, 0.5, 0.1, 0.2};   // W2 rows, b2
    const Logits g = forward(deep, q, x);
    const double h0 = 1.0 * x[0] + 2.0 * x[1] + 0.5;
    const double h1 = 3.0 * x[0] + 4.0 * x[1] - 0.5;
    CHECK(g.values[0] == doctest::Approx(1.0 * h0 - 1.0 * h1 + 0.1).epsilon(1e-15));
    CHECK(g.values[1] == doctest::Approx(2.0 * h0 + 0.5 * h1 + 0.2).epsilon(1e-15));

    CHECK_THROWS_AS(forward(kLinear23, p, {1.0}), std::invalid_argument);
}

TEST_CASE("predictive: uniform at zero logits, analytic case, bias-shift invariance") {
    const Pmf u = predictive(kLinear23, zeros(kLinear23), {1.0, 1.0});
    for (double v : u.probs) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const ModelSpec two{1, {}, 2, Activation::Identity};
    ParamVector p;
    p.theta = {0.0, 0.0, std::log(2.0), 0.0};  // weights 0, biases (ln 2, 0)
    const Pmf pr = predictive(two, p, {0.5});
    CHECK(pr.probs[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    CounterRng rng(RngSeed{33});
    const ModelSpec mlp{2, {5}, 3, Activation::Tanh};
    ParamVector t = init_params(mlp, RngSeed{9});
    const std::vector<double> x{0.2, -0.4};
    const Pmf before = predictive(mlp, t, x);
    const std::size_t bias_start = mlp.param_count() - 3;
    for (std::size_t i = 0; i < 3; ++i) t.theta[bias_start + i] += 2.5;
    const Pmf after = predictive(mlp, t, x);
    for (std::size_t i = 0; i < 3; ++i) CHECK(before.probs[i] == doctest::Approx(after.probs[i]).epsilon(1e-12));
}

TEST_CASE("jacobian: linear analytic structure") {
    ParamVector p = init_params(kLinear23, RngSeed{4});
    const std::vector<double> x{0.7, -1.3};
    const JacobianMatrix jac = jacobian(kLinear23, p, x);
    REQUIRE(jac.rows == 3);
    REQUIRE(jac.cols == 9);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t j = 0; j < 2; ++j)
                CHECK(jac(i, r * 2 + j) == doctest::Approx(r == i ? x[j] : 0.0).epsilon(1e-15));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t r = 0; r < 3; ++r) CHECK(jac(i, 6 + r) == (r == i ? 1.0 : 0.0));

    // Zero input: weight block vanishes, bias block stays the identity.
    const JacobianMatrix j0 = jacobian(kLinear23, p, {0.0, 0.0});
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t c = 0; c < 6; ++c) CHECK(j0(i, c) == 0.0);
}

TEST_CASE("jacobian and kl_grad agree with finite differences") {
    const CheckList checks = check_jacobian_oracles(20, 91);
    for (const auto& c : checks) {
        INFO(c.name, ": ", c.detail);
        CHECK(c.passed);
    }
}

TEST_CASE("relu jacobian passes FD away from kink points") {
    const ModelSpec spec{2, {8}, 3, Activation::Relu};
    CounterRng rng(RngSeed{55});
    const double h = 1e-5;
    int tested = 0;
    while (tested < 5) {
        ParamVector params = init_params(spec, RngSeed{rng.next_u64()});
        const std::vector<double> x{rng.normal(), rng.normal()};
        // Reject draws whose pre-activations sit near the relu kink.
        const auto tr = detail::forward_trace(spec, params, x);
        bool near_kink = false;
        for (double v : tr.preacts[0])
            if (std::abs(v) <= 10.0 * h) near_kink = true;
        if (near_kink) continue;
        ++tested;
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
            for (std::size_t i = 0; i < jac.rows; ++i)
                CHECK(std::abs((fp.values[i] - fm.values[i]) / (2.0 * h) - jac(i, j)) <= 1e-6 * std::max(jmax, 1.0));
        }
    }
}

TEST_CASE("kl_grad: minimizer gives the zero vector; linear one-hot analytic form") {
    const ModelSpec spec{2, {6}, 3, Activation::Tanh};
    const ParamVector params = init_params(spec, RngSeed{17});
    const std::vector<double> x{0.5, 0.25};
    const Pmf p = predictive(spec, params, x);
    for (double g : kl_grad(spec, params, x, p)) CHECK(g == 0.0);

    const ParamVector lin = init_params(kLinear23, RngSeed{18});
    const Pmf onehot({1.0, 0.0, 0.0});
    const Pmf pred = predictive(kLinear23, lin, x);
    const std::vector<double> g = kl_grad(kLinear23, lin, x, onehot);
    for (std::size_t i = 0; i < 3; ++i) {
        const double di = onehot.probs[i] - pred.probs[i];
        for (std::size_t j = 0; j < 2; ++j) CHECK(g[i * 2 + j] == doctest::Approx(di * x[j]).epsilon(1e-12));
        CHECK(g[6 + i] == doctest::Approx(di).epsilon(1e-12));
    }
}

TEST_CASE("entk: bias-only Gram is the identity; spectrum matches the m-side Gram") {
    // Zero input and zero weights: only output biases contribute.
    const EntkMatrix kernel = entk(kLinear23, zeros(kLinear23), {0.0, 0.0});
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(kernel.gram(i, j) == (i == j ? 1.0 : 0.0));
    CHECK(entk_lambda_max(kLinear23, zeros(kLinear23), {0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));

    const ModelSpec spec{2, {5}, 3, Activation::Tanh};
    const ParamVector params = init_params(spec, RngSeed{23});
    const std::vector<double> x{0.9, -0.1};
    const JacobianMatrix jac = jacobian(spec, params, x);
    const linalg::Matrix small = linalg::gram(jac);
    const linalg::Matrix big = linalg::gram(linalg::transpose(jac));  // J^T J
    const auto eig_small = linalg::sym_eigenvalues(small);
    const auto eig_big = linalg::sym_eigenvalues(big);
    // Nonzero spectrum coincides; J^T J pads with zeros.
    for (std::size_t i = 0; i < eig_small.size(); ++i)
        CHECK(eig_small[eig_small.size() - 1 - i] ==
              doctest::Approx(eig_big[eig_big.size() - 1 - i]).epsilon(1e-9).scale(1.0));
    CHECK(linalg::trace(small) == doctest::Approx(linalg::frobenius_norm_sq(jac)).epsilon(1e-12));
}

TEST_CASE("entk lambda_max dominates Rayleigh quotients") {
    const ModelSpec spec{3, {7}, 4, Activation::Tanh};
    const ParamVector params = init_params(spec, RngSeed{29});
    const std::vector<double> x{0.1, 0.2, -0.3};
    const JacobianMatrix jac = jacobian(spec, params, x);
    const double lmax = entk_lambda_max(spec, params, x);
    CounterRng rng(RngSeed{31});
    for (int c = 0; c < 100; ++c) {
        std::vector<double> v(4);
        for (double& t : v) t = rng.normal();
        CHECK(linalg::norm_sq(linalg::matvec_transposed(jac, v)) <= lmax * linalg::norm_sq(v) + 1e-9);
    }
    CHECK(lambda_max_psd(linalg::Matrix(3, 3)) == 0.0);
}

TEST_CASE("power iteration matches the dense solver past the size cutoff") {
    CounterRng rng(RngSeed{37});
    linalg::Matrix base(70, 70);
    for (double& v : base.data) v = rng.normal();
    const linalg::Matrix psd = linalg::gram(base);
    const double dense = linalg::sym_eigenvalues(psd).back();
    const double power = lambda_max_psd(psd);  // 70 > 64 routes to power iteration
    CHECK(power == doctest::Approx(dense).epsilon(1e-7));
}

TEST_CASE("eigenvalue lemmas on random PSD pairs") {
    const CheckResult r = check_eigenvalue_lemmas(100, 41);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("init_params: deterministic and fan-in bounded") {
    const ModelSpec spec{4, {8}, 3, Activation::Tanh};
    const ParamVector a = init_params(spec, RngSeed{77});
    const ParamVector b = init_params(spec, RngSeed{77});
    CHECK(a.theta == b.theta);
    for (std::size_t i = 0; i < (4 + 1) * 8; ++i) CHECK(std::abs(a.theta[i]) <= 0.5);  // 1/sqrt(4)

    ParamVector bad;
    bad.theta.assign(spec.param_count() - 1, 0.0);
    CHECK_THROWS_AS(bad.validate(spec), std::invalid_argument);
}

}  // TEST_SUITE
