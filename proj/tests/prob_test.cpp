// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <doctest.h>

#include <cmath>
#include <vector>

#include "riskbounds/prob.hpp"

using namespace riskbounds;

TEST_SUITE("prob") {

TEST_CASE("entropy: one-hot, uniform, and a direct-sum oracle") {
    CHECK(entropy(Pmf({1.0, 0.0, 0.0, 0.0})) == 0.0);
    CHECK(entropy(Pmf({0.25, 0.25, 0.25, 0.25})) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    // Oracle: direct evaluation of -sum p ln p.
    const double expected = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
    CHECK(expected == doctest::Approx(0.562335).epsilon(1e-5));
    CHECK(entropy(Pmf({0.75, 0.25})) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("entropy rejects invalid PMFs") {
    Pmf bad;
    bad.probs = {0.5, 0.6};
    CHECK_THROWS_AS(entropy(bad), std::invalid_argument);
    bad.probs = {1.2, -0.2};
    CHECK_THROWS_AS(entropy(bad), std::invalid_argument);
}

TEST_CASE("kl_divergence: identity, analytic, and direct-sum oracle") {
    const Pmf half({0.5, 0.5});
    CHECK(kl_divergence(half, half) == 0.0);
    CHECK(kl_divergence(Pmf({1.0, 0.0}), half) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    const double expected = 0.75 * std::log(0.75 / 0.5) + 0.25 * std::log(0.25 / 0.5);
    CHECK(expected == doctest::Approx(0.130812).epsilon(1e-5));
    CHECK(kl_divergence(Pmf({0.75, 0.25}), half) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("kl_divergence conventions: zero mass and infinite divergence") {
    CHECK(kl_divergence(Pmf({0.0, 1.0}), Pmf({0.0, 1.0})) == 0.0);
    CHECK(kl_divergence(Pmf({0.5, 0.5}), Pmf({1.0, 0.0})) == kInfinity);
    CHECK_THROWS_AS(kl_divergence(Pmf({0.5, 0.5}), Pmf({0.5, 0.25, 0.25})), std::invalid_argument);
}

TEST_CASE("l1_distance basics") {
    CHECK(l1_distance(Pmf({0.3, 0.7}), Pmf({0.3, 0.7})) == 0.0);
    CHECK(l1_distance(Pmf({1.0, 0.0}), Pmf({0.0, 1.0})) == doctest::Approx(2.0));
    CHECK(l1_distance(Pmf({0.75, 0.25}), Pmf({0.5, 0.5})) == doctest::Approx(0.5));
}

TEST_CASE("softmax: symmetry, analytic case, shift invariance, stability") {
    const SoftmaxResult sym = softmax(Logits({0.0, 0.0, 0.0}));
    for (double p : sym.pmf.probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(sym.log_partition == doctest::Approx(std::log(3.0)).epsilon(1e-15));

    const SoftmaxResult two = softmax(Logits({std::log(2.0), 0.0}));
    CHECK(two.pmf.probs[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(two.pmf.probs[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(two.log_partition == doctest::Approx(std::log(3.0)).epsilon(1e-15));

    CounterRng rng(RngSeed{7});
    for (int c = 0; c < 50; ++c) {
        std::vector<double> f(4);
        for (double& v : f) v = 5.0 * rng.normal();
        const double shift = 100.0 * rng.normal();
        std::vector<double> g = f;
        for (double& v : g) v += shift;
        const SoftmaxResult a = softmax(Logits(f));
        const SoftmaxResult b = softmax(Logits(g));
        for (std::size_t i = 0; i < 4; ++i) CHECK(a.pmf.probs[i] == doctest::Approx(b.pmf.probs[i]).epsilon(1e-12));
        // ln Z against the naive sum at small magnitudes.
        double z = 0.0;
        for (double v : f) z += std::exp(v);
        CHECK(a.log_partition == doctest::Approx(std::log(z)).epsilon(1e-12));
    }

    // No overflow for logits up to 700.
    const SoftmaxResult big = softmax(Logits({700.0, -700.0}));
    CHECK(std::isfinite(big.log_partition));
    CHECK(big.pmf.probs[0] == doctest::Approx(1.0).epsilon(1e-15));

    Logits bad;
    bad.values = {0.0, std::nan("")};
    CHECK_THROWS_AS(softmax(bad), std::invalid_argument);
}

TEST_CASE("entropy of uniform softmax is exactly ln K") {
    for (std::size_t k : {2u, 3u, 5u, 17u}) {
        const SoftmaxResult sm = softmax(Logits(std::vector<double>(k, 0.0)));
        CHECK(std::abs(entropy(sm.pmf) - std::log(static_cast<double>(k))) <= 1e-12);
    }
}

TEST_CASE("pinsker_gap: analytic values and range validation") {
    const Pmf q({1.0, 0.0});
    const Pmf p({0.5, 0.5});
    SUBCASE("q = p gives zero") {
        const double g = pinsker_gap(p, p, {0.3, 0.6}, 1.0);
        CHECK(g == 0.0);
    }
    SUBCASE("extremal statistic") {
        const double loss_sup = 2.5;
        const double g = pinsker_gap(q, p, {loss_sup, 0.0}, loss_sup);
        CHECK(g == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-14));
    }
    SUBCASE("out-of-range f rejected") {
        CHECK_THROWS_AS(pinsker_gap(q, p, {1.5, 0.0}, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(pinsker_gap(q, p, {-0.1, 0.0}, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(pinsker_gap(q, p, {0.0, 0.0}, 0.0), std::invalid_argument);
    }
}

TEST_CASE("pinsker_gap and Pinsker inequality hold on random sweeps") {
    CounterRng rng(RngSeed{11});
    for (int c = 0; c < 10000; ++c) {
        const std::size_t k = 2 + rng.next_below(6);
        const Pmf q = sample_dirichlet(std::vector<double>(k, 1.0), rng);
        const Pmf p = sample_dirichlet(std::vector<double>(k, 1.0), rng);
        const double l1 = l1_distance(q, p);
        CHECK(kl_divergence(q, p) >= 0.5 * l1 * l1 - 1e-12);
        const double loss_sup = 0.2 + 5.0 * rng.next_double();
        std::vector<double> f(k);
        for (double& v : f) v = loss_sup * rng.next_double();
        CHECK(pinsker_gap(q, p, f, loss_sup) >= -1e-12);
    }
}

TEST_CASE("kl equality iff distributions match") {
    CounterRng rng(RngSeed{13});
    for (int c = 0; c < 200; ++c) {
        const Pmf q = sample_dirichlet({1.0, 1.0, 1.0}, rng);
        CHECK(kl_divergence(q, q) <= 1e-12);
        std::vector<double> shifted = q.probs;
        const double eps = 1e-3;
        shifted[0] += eps;
        shifted[1] -= eps;
        if (shifted[1] > 0.0) CHECK(kl_divergence(Pmf(shifted), q) > 1e-12);
    }
}

TEST_CASE("sample_empirical: determinism, structure, and the law of large numbers") {
    const Pmf q_bar({0.5, 0.5});
    const Pmf a = sample_empirical(q_bar, 1000, RngSeed{42});
    const Pmf b = sample_empirical(q_bar, 1000, RngSeed{42});
    CHECK(a.probs == b.probs);

    double sum = 0.0;
    for (double v : a.probs) {
        const double scaled = v * 1000.0;
        CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));

    const Pmf big = sample_empirical(q_bar, 1000000, RngSeed{7});
    CHECK(l1_distance(big, q_bar) <= 0.01);

    CHECK_THROWS_AS(sample_empirical(q_bar, 0, RngSeed{1}), std::invalid_argument);
}

TEST_CASE("sample_dirichlet: mean, concentration, validity") {
    CounterRng rng(RngSeed{21});
    double mean0 = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) mean0 += sample_dirichlet({1.0, 1.0}, rng).probs[0];
    mean0 /= draws;
    CHECK(mean0 == doctest::Approx(0.5).epsilon(0.01));  // Dirichlet mean oracle, +/- 0.005 absolute
    CHECK(std::abs(mean0 - 0.5) <= 0.005);

    const Pmf tight = sample_dirichlet({1e6, 1e6}, RngSeed{3});
    CHECK(std::abs(tight.probs[0] - 0.5) <= 0.01);
    tight.validate();

    CHECK_THROWS_AS(sample_dirichlet({1.0, 0.0}, RngSeed{1}), std::invalid_argument);
}

TEST_CASE("counter rng streams are independent and reproducible") {
    CounterRng a(RngSeed{5}, 0);
    CounterRng b(RngSeed{5}, 0);
    CounterRng c(RngSeed{5}, 1);
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() != c.next_u64());
}

}  // TEST_SUITE
