#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "riskbounds/model.hpp"
#include "riskbounds/prob.hpp"

namespace riskbounds {

/**
 * Grouped empirical distribution: distinct feature vectors with their
 * conditional label PMFs and marginal weights (the q_X marginal).
 */
struct Dataset {
    struct Entry {
        std::vector<double> x;
        Pmf q_yx;
        double weight = 0.0;
    };
    std::vector<Entry> entries;

    void validate() const {
        if (entries.empty()) throw std::invalid_argument("Dataset: empty");
        double sum = 0.0;
        const std::size_t k = entries.front().q_yx.probs.size();
        const std::size_t d = entries.front().x.size();
        for (const Entry& e : entries) {
            if (!(e.weight > 0.0)) throw std::invalid_argument("Dataset: weights must be positive");
            if (e.q_yx.probs.size() != k) throw std::invalid_argument("Dataset: inconsistent label alphabet");
            if (e.x.size() != d) throw std::invalid_argument("Dataset: inconsistent feature dimension");
            e.q_yx.validate();
            sum += e.weight;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("Dataset: weights must sum to 1");
        for (std::size_t i = 0; i < entries.size(); ++i)
            for (std::size_t j = i + 1; j < entries.size(); ++j)
                if (entries[i].x == entries[j].x) throw std::invalid_argument("Dataset: duplicate feature vector");
    }

    std::size_t num_classes() const { return entries.empty() ? 0 : entries.front().q_yx.probs.size(); }
    std::size_t feature_dim() const { return entries.empty() ? 0 : entries.front().x.size(); }

    /**
     * Groups raw (x, label) samples into a Dataset: identical feature rows
     * merge into one entry whose conditional is the label frequency and
     * whose weight is the group share.
     */
    static Dataset from_samples(const std::vector<std::vector<double>>& xs, const std::vector<std::size_t>& labels,
                                std::size_t num_classes) {
        if (xs.size() != labels.size() || xs.empty())
            throw std::invalid_argument("Dataset::from_samples: empty or mismatched inputs");
        if (num_classes == 0) throw std::invalid_argument("Dataset::from_samples: num_classes must be positive");
        std::map<std::vector<double>, std::vector<std::uint64_t>> groups;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (labels[i] >= num_classes) throw std::invalid_argument("Dataset::from_samples: label out of range");
            auto& counts = groups[xs[i]];
            if (counts.empty()) counts.assign(num_classes, 0);
            ++counts[labels[i]];
        }
        const double n = static_cast<double>(xs.size());
        Dataset ds;
        ds.entries.reserve(groups.size());
        for (auto& [x, counts] : groups) {
            const double group_n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
            std::vector<double> q(num_classes);
            for (std::size_t y = 0; y < num_classes; ++y) q[y] = static_cast<double>(counts[y]) / group_n;
            ds.entries.push_back(Entry{x, Pmf(std::move(q)), group_n / n});
        }
        ds.validate();
        return ds;
    }
};

/**
 * Joint distribution over a discrete feature grid times the label set.
 * Row g of `probs` holds q(x_g, y) for all labels y.
 */
struct JointPmf {
    std::vector<std::vector<double>> features;
    linalg::Matrix probs;  // features.size() x num_classes

    void validate() const {
        if (features.empty() || probs.rows != features.size() || probs.cols == 0)
            throw std::invalid_argument("JointPmf: inconsistent shape");
        double sum = 0.0;
        for (double v : probs.data) {
            if (!(v >= 0.0)) throw std::invalid_argument("JointPmf: negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("JointPmf: entries must sum to 1");
    }

    std::size_t num_classes() const { return probs.cols; }

    /// Index of an exactly matching feature vector, or npos.
    std::size_t find_feature(const std::vector<double>& x) const {
        for (std::size_t g = 0; g < features.size(); ++g)
            if (features[g] == x) return g;
        return static_cast<std::size_t>(-1);
    }

    /// Flat PMF over z = g * num_classes + y (row-major).
    Pmf flatten() const {
        validate();
        return Pmf(probs.data);
    }
};

// ---------------------------------------------------------------------------
// Loss functions
// ---------------------------------------------------------------------------

enum class LossKind { SoftmaxCrossEntropy, ClippedCrossEntropy, ZeroOne };

/// Loss selector. Clipped cross-entropy and zero-one are bounded with a
/// known sup; plain cross-entropy has L = +inf.
struct LossSpec {
    LossKind kind = LossKind::SoftmaxCrossEntropy;
    double l_max = 10.0;  // clip level for ClippedCrossEntropy, in nats

    static LossSpec softmax_cross_entropy() { return LossSpec{LossKind::SoftmaxCrossEntropy, 0.0}; }
    static LossSpec clipped_cross_entropy(double l_max) {
        if (!(l_max > 0.0)) throw std::invalid_argument("LossSpec: l_max must be > 0");
        return LossSpec{LossKind::ClippedCrossEntropy, l_max};
    }
    static LossSpec zero_one() { return LossSpec{LossKind::ZeroOne, 0.0}; }

    /// sup over inputs of the loss value (L = ||l||_inf).
    double sup() const {
        switch (kind) {
            case LossKind::SoftmaxCrossEntropy: return kInfinity;
            case LossKind::ClippedCrossEntropy: return l_max;
            case LossKind::ZeroOne: return 1.0;
        }
        return kInfinity;
    }

    bool bounded() const { return std::isfinite(sup()); }
};

/// First index attaining the maximum logit (the predicted label).
inline std::size_t argmax_label(const Logits& f) {
    return static_cast<std::size_t>(std::max_element(f.values.begin(), f.values.end()) - f.values.begin());
}

/**
 * The per-label loss vector l(f_theta(x)) = (l(f,y_1), ..., l(f,y_K)).
 * Cross-entropy terms use ln p_y = f_y - ln Z for stability.
 */
inline std::vector<double> loss_vector(const LossSpec& loss, const Logits& f) {
    const SoftmaxResult sm = softmax(f);
    std::vector<double> out(f.values.size());
    switch (loss.kind) {
        case LossKind::SoftmaxCrossEntropy:
            for (std::size_t y = 0; y < out.size(); ++y) out[y] = sm.log_partition - f.values[y];
            break;
        case LossKind::ClippedCrossEntropy:
            for (std::size_t y = 0; y < out.size(); ++y)
                out[y] = std::min(sm.log_partition - f.values[y], loss.l_max);
            break;
        case LossKind::ZeroOne: {
            const std::size_t pred = argmax_label(f);
            for (std::size_t y = 0; y < out.size(); ++y) out[y] = (y == pred) ? 0.0 : 1.0;
            break;
        }
    }
    return out;
}

}  // namespace riskbounds
