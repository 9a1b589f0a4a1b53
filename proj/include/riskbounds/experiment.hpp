#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "riskbounds/dataset.hpp"
#include "riskbounds/fitdiag.hpp"
#include "riskbounds/model.hpp"
#include "riskbounds/prob.hpp"
#include "riskbounds/rng.hpp"

namespace riskbounds {

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

/**
 * Discrete-feature synthetic task: num_grid_points feature vectors drawn
 * around per-class centers, uniform marginal, and class-conditional label
 * noise. The exact joint is returned next to the sampled datasets.
 */
struct SyntheticDataSpec {
    std::size_t num_grid_points = 120;
    std::size_t input_dim = 2;
    std::size_t num_classes = 3;
    double label_noise = 0.1;
    std::uint64_t train_n = 6000;
    std::uint64_t test_n = 2000;

    void validate() const {
        if (num_grid_points == 0 || input_dim == 0 || num_classes == 0)
            throw std::invalid_argument("SyntheticDataSpec: sizes must be positive");
        if (num_grid_points < num_classes)
            throw std::invalid_argument("SyntheticDataSpec: need at least one grid point per class");
        if (num_grid_points * num_classes > 10000)
            throw std::invalid_argument("SyntheticDataSpec: joint alphabet above desk scale (10^4)");
        if (!(label_noise >= 0.0 && label_noise <= 0.5))
            throw std::invalid_argument("SyntheticDataSpec: label_noise must be in [0, 0.5]");
        if (num_classes == 1 && label_noise > 0.0)
            throw std::invalid_argument("SyntheticDataSpec: label noise needs at least two classes");
        if (train_n == 0 || test_n == 0) throw std::invalid_argument("SyntheticDataSpec: sample sizes must be positive");
    }
};

struct SyntheticData {
    Dataset train;
    Dataset test;
    JointPmf q_bar;
    std::vector<std::uint64_t> train_counts;  // over z = g * num_classes + y
    std::uint64_t train_n = 0;
};

namespace detail {

inline Dataset dataset_from_joint_counts(const JointPmf& joint, const std::vector<std::uint64_t>& counts,
                                         std::uint64_t n) {
    const std::size_t k = joint.num_classes();
    Dataset ds;
    for (std::size_t g = 0; g < joint.features.size(); ++g) {
        std::uint64_t total = 0;
        for (std::size_t y = 0; y < k; ++y) total += counts[g * k + y];
        if (total == 0) continue;
        std::vector<double> q(k);
        for (std::size_t y = 0; y < k; ++y) q[y] = static_cast<double>(counts[g * k + y]) / static_cast<double>(total);
        ds.entries.push_back(
            Dataset::Entry{joint.features[g], Pmf(std::move(q)), static_cast<double>(total) / static_cast<double>(n)});
    }
    ds.validate();
    return ds;
}

inline bool every_class_sampled(const std::vector<std::uint64_t>& counts, std::size_t k) {
    for (std::size_t y = 0; y < k; ++y) {
        std::uint64_t total = 0;
        for (std::size_t z = y; z < counts.size(); z += k) total += counts[z];
        if (total == 0) return false;
    }
    return true;
}

}  // namespace detail

/// Deterministic synthetic task with a fully known ground-truth joint.
inline SyntheticData make_synthetic(const SyntheticDataSpec& spec, RngSeed seed) {
    spec.validate();
    const std::size_t g_count = spec.num_grid_points;
    const std::size_t k = spec.num_classes;

    JointPmf joint;
    {
        CounterRng geom(seed, 30000);
        std::vector<std::vector<double>> centers(k, std::vector<double>(spec.input_dim));
        for (auto& c : centers)
            for (double& v : c) v = 2.0 * geom.normal();
        joint.features.assign(g_count, std::vector<double>(spec.input_dim));
        joint.probs = linalg::Matrix(g_count, k);
        const double px = 1.0 / static_cast<double>(g_count);
        for (std::size_t g = 0; g < g_count; ++g) {
            const std::size_t cls = g % k;
            for (std::size_t d = 0; d < spec.input_dim; ++d)
                joint.features[g][d] = centers[cls][d] + 0.5 * geom.normal();
            for (std::size_t y = 0; y < k; ++y) {
                const double cond = (y == cls) ? 1.0 - spec.label_noise
                                               : spec.label_noise / static_cast<double>(k - 1);
                joint.probs(g, y) = px * cond;
            }
        }
        joint.validate();
    }
    const Pmf flat = joint.flatten();

    SyntheticData out;
    out.q_bar = joint;
    out.train_n = spec.train_n;

    for (int attempt = 0; attempt < 10; ++attempt) {
        CounterRng rng(seed, 10000 + static_cast<std::uint64_t>(attempt));
        std::vector<std::uint64_t> counts = multinomial_counts(flat, spec.train_n, rng);
        if (!detail::every_class_sampled(counts, k)) continue;
        out.train = detail::dataset_from_joint_counts(joint, counts, spec.train_n);
        out.train_counts = std::move(counts);
        break;
    }
    if (out.train_counts.empty()) throw std::runtime_error("make_synthetic: a class stayed empty after 10 attempts");

    bool test_ok = false;
    for (int attempt = 0; attempt < 10; ++attempt) {
        CounterRng rng(seed, 20000 + static_cast<std::uint64_t>(attempt));
        const std::vector<std::uint64_t> counts = multinomial_counts(flat, spec.test_n, rng);
        if (!detail::every_class_sampled(counts, k)) continue;
        out.test = detail::dataset_from_joint_counts(joint, counts, spec.test_n);
        test_ok = true;
        break;
    }
    if (!test_ok) throw std::runtime_error("make_synthetic: a class stayed empty after 10 attempts (test split)");
    return out;
}

// ---------------------------------------------------------------------------
// SGD training
// ---------------------------------------------------------------------------

struct TrainConfig {
    std::vector<std::pair<std::uint64_t, double>> learning_rate_schedule = {{0, 0.1}, {120, 0.01}, {160, 0.001}};
    double momentum = 0.9;
    double weight_decay = 5e-4;
    std::uint64_t batch_size = 100;
    std::uint64_t epochs = 200;
    RngSeed seed;
    std::uint64_t stabilization_window = 10;
    double stabilization_tolerance = 1e-3;

    void validate() const {
        if (learning_rate_schedule.empty() || learning_rate_schedule.front().first != 0)
            throw std::invalid_argument("TrainConfig: schedule must start at epoch 0");
        for (std::size_t i = 0; i + 1 < learning_rate_schedule.size(); ++i)
            if (!(learning_rate_schedule[i].first < learning_rate_schedule[i + 1].first))
                throw std::invalid_argument("TrainConfig: schedule epochs must be strictly increasing");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("TrainConfig: momentum must be in [0,1)");
        if (!(weight_decay >= 0.0)) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
        if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be positive");
        if (epochs == 0) throw std::invalid_argument("TrainConfig: epochs must be positive");
        if (stabilization_window == 0) throw std::invalid_argument("TrainConfig: stabilization_window must be positive");
        if (!(stabilization_tolerance > 0.0))
            throw std::invalid_argument("TrainConfig: stabilization_tolerance must be > 0");
    }

    double rate_at(std::uint64_t epoch) const {
        double rate = learning_rate_schedule.front().second;
        for (const auto& [e, r] : learning_rate_schedule)
            if (e <= epoch) rate = r;
        return rate;
    }
};

/// v <- mu v + (g + wd * theta); theta <- theta - lr * v.
class SgdOptimizer {
public:
    SgdOptimizer(std::size_t dim, double momentum, double weight_decay)
        : momentum_(momentum), weight_decay_(weight_decay), velocity_(dim, 0.0) {}

    void step(std::vector<double>& theta, const std::vector<double>& grad, double lr) {
        if (theta.size() != velocity_.size() || grad.size() != velocity_.size())
            throw std::invalid_argument("SgdOptimizer: dimension mismatch");
        for (std::size_t j = 0; j < theta.size(); ++j) {
            velocity_[j] = momentum_ * velocity_[j] + (grad[j] + weight_decay_ * theta[j]);
            theta[j] -= lr * velocity_[j];
        }
    }

private:
    double momentum_;
    double weight_decay_;
    std::vector<double> velocity_;
};

/// Per-epoch diagnostics over the full training distribution.
struct EpochRecord {
    std::uint64_t epoch = 0;
    double train_loss = 0.0;       // softmax cross-entropy risk under q
    double test_accuracy = 0.0;    // in [0, 1]
    double mean_f = 0.0;           // E_X[F]
    double mean_g = 0.0;           // E_X[G]
    double lambda_max_max = 0.0;   // max_x lambda_max(eNTK)
    double mean_residual_sq = 0.0; // E_X ||q - p||^2; equals mean_f + mean_g
    double fit_normalized = 0.0;   // from the same pass, for the fitting bound
};

struct TrainResult {
    std::vector<EpochRecord> records;
    ParamVector params;
    bool diverged = false;
};

namespace detail {

inline EpochRecord epoch_diagnostics(const ModelSpec& spec, const ParamVector& params, const Dataset& train,
                                     const Dataset& test, std::uint64_t epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    double model_minus_emp = 0.0;
    double loss_l2_mean = 0.0;
    for (const auto& entry : train.entries) {
        const Logits f = forward(spec, params, entry.x);
        const SoftmaxResult sm = softmax(f);
        const std::vector<double> lvec = loss_vector(LossSpec::softmax_cross_entropy(), f);
        double ql = 0.0;
        double pl = 0.0;
        double l2 = 0.0;
        for (std::size_t y = 0; y < lvec.size(); ++y) {
            ql += entry.q_yx.probs[y] * lvec[y];
            pl += sm.pmf.probs[y] * lvec[y];
            l2 += lvec[y] * lvec[y];
        }
        rec.train_loss += entry.weight * ql;
        model_minus_emp += entry.weight * (pl - ql);
        loss_l2_mean += entry.weight * l2;

        const FitDecomposition dec = decompose(spec, params, entry.x, entry.q_yx);
        rec.mean_f += entry.weight * dec.f_term;
        rec.mean_g += entry.weight * dec.g_term;
        rec.mean_residual_sq += entry.weight * dec.residual_sq;
        rec.lambda_max_max = std::max(rec.lambda_max_max, entk_lambda_max(spec, params, entry.x));
    }
    rec.fit_normalized = loss_l2_mean > 0.0 ? std::abs(model_minus_emp) / std::sqrt(loss_l2_mean) : 0.0;
    for (const auto& entry : test.entries) {
        const std::size_t pred = argmax_label(forward(spec, params, entry.x));
        rec.test_accuracy += entry.weight * entry.q_yx.probs[pred];
    }
    return rec;
}

}  // namespace detail

/**
 * Mini-batch SGD with momentum and weight decay on the softmax
 * cross-entropy risk. Batches are shuffled slices of the grouped entries;
 * each step uses the weight-normalized batch gradient. Ends each epoch
 * with full-dataset diagnostics. Deterministic per config.seed.
 */
inline TrainResult train(const ModelSpec& model_spec, const TrainConfig& config, const Dataset& train_ds,
                         const Dataset& test_ds) {
    model_spec.validate();
    config.validate();
    train_ds.validate();
    test_ds.validate();
    if (train_ds.num_classes() != model_spec.num_classes || train_ds.feature_dim() != model_spec.input_dim)
        throw std::invalid_argument("train: dataset does not match the model spec");

    TrainResult result;
    result.params = init_params(model_spec, config.seed);
    SgdOptimizer opt(result.params.theta.size(), config.momentum, config.weight_decay);

    const std::size_t num_entries = train_ds.entries.size();
    std::vector<std::size_t> order(num_entries);
    std::vector<double> grad(result.params.theta.size());
    for (std::uint64_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = config.rate_at(epoch);
        for (std::size_t i = 0; i < num_entries; ++i) order[i] = i;
        CounterRng shuffle_rng(config.seed, epoch + 1);
        for (std::size_t i = num_entries; i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);

        // Numeric blowups mid-epoch (overflowing forwards, non-finite
        // parameters) abort with the records collected so far.
        try {
            for (std::size_t start = 0; start < num_entries; start += config.batch_size) {
                const std::size_t end = std::min(num_entries, start + static_cast<std::size_t>(config.batch_size));
                std::fill(grad.begin(), grad.end(), 0.0);
                double batch_weight = 0.0;
                for (std::size_t b = start; b < end; ++b) {
                    const auto& entry = train_ds.entries[order[b]];
                    const Pmf p = predictive(model_spec, result.params, entry.x);
                    std::vector<double> delta(p.probs.size());
                    for (std::size_t y = 0; y < delta.size(); ++y) delta[y] = p.probs[y] - entry.q_yx.probs[y];
                    const std::vector<double> g = vjp(model_spec, result.params, entry.x, delta);
                    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += entry.weight * g[j];
                    batch_weight += entry.weight;
                }
                for (double& v : grad) v /= batch_weight;
                opt.step(result.params.theta, grad, lr);
            }

            bool finite = true;
            for (double v : result.params.theta)
                if (!std::isfinite(v)) finite = false;
            if (!finite) {
                result.diverged = true;
                return result;
            }
            const EpochRecord rec = detail::epoch_diagnostics(model_spec, result.params, train_ds, test_ds, epoch);
            if (!std::isfinite(rec.train_loss)) {
                result.diverged = true;
                return result;
            }
            result.records.push_back(rec);
        } catch (const std::exception&) {
            result.diverged = true;
            return result;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Correlation study
// ---------------------------------------------------------------------------

/// Sample Pearson correlation; requires length >= 3 and nonzero variances.
inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("pearson: length mismatch");
    if (xs.size() < 3) throw std::invalid_argument("pearson: need at least 3 points");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw std::invalid_argument("pearson: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

/// First epoch at which the trailing-window train-loss range drops below
/// the tolerance, or -1 when it never does.
inline std::int64_t detect_stabilization(const std::vector<EpochRecord>& records, std::uint64_t window,
                                         double tolerance) {
    if (window == 0 || records.size() < window) return -1;
    for (std::size_t e = window - 1; e < records.size(); ++e) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = e + 1 - window; i <= e; ++i) {
            lo = std::min(lo, records[i].train_loss);
            hi = std::max(hi, records[i].train_loss);
        }
        if (hi - lo <= tolerance) return static_cast<std::int64_t>(e);
    }
    return -1;
}

struct CorrelationReport {
    std::uint64_t seed = 0;
    std::int64_t stabilized_at = -1;  // -1: never stabilized
    double r_accuracy_f = std::numeric_limits<double>::quiet_NaN();
    double r_accuracy_g = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t window = 0;
    bool stable = false;
    bool r_f_defined = false;
    bool r_g_defined = false;
    double accuracy_scale_divisor = 20.0;
};

/// Pearson correlations of accuracy against E_X[F] and E_X[G] over the
/// post-stabilization tail (or the final window, flagged, if unstable).
inline CorrelationReport correlate_records(const std::vector<EpochRecord>& records, std::uint64_t window,
                                           double tolerance, std::uint64_t seed) {
    CorrelationReport rep;
    rep.seed = seed;
    rep.window = window;
    if (records.empty()) return rep;
    rep.stabilized_at = detect_stabilization(records, window, tolerance);
    rep.stable = rep.stabilized_at >= 0;
    const std::size_t tail_start = rep.stable
                                       ? static_cast<std::size_t>(rep.stabilized_at)
                                       : records.size() - std::min<std::size_t>(records.size(), window);
    std::vector<double> acc;
    std::vector<double> fs;
    std::vector<double> gs;
    for (std::size_t i = tail_start; i < records.size(); ++i) {
        acc.push_back(records[i].test_accuracy);
        fs.push_back(records[i].mean_f);
        gs.push_back(records[i].mean_g);
    }
    try {
        rep.r_accuracy_f = pearson(acc, fs);
        rep.r_f_defined = true;
    } catch (const std::invalid_argument&) {
    }
    try {
        rep.r_accuracy_g = pearson(acc, gs);
        rep.r_g_defined = true;
    } catch (const std::invalid_argument&) {
    }
    return rep;
}

struct ExperimentResult {
    std::vector<EpochRecord> records;
    CorrelationReport report;
    ParamVector params;
    bool diverged = false;
};

/**
 * End-to-end study: synthesize data, train, detect stabilization, and
 * correlate the post-stabilization accuracy trace against E_X[F] and
 * E_X[G]. The explicit seed drives data generation, initialization and
 * shuffling (config.seed is overridden).
 */
inline ExperimentResult run_correlation_experiment(const ModelSpec& model_spec, const TrainConfig& config,
                                                   const SyntheticDataSpec& data_spec, RngSeed seed) {
    const SyntheticData data = make_synthetic(data_spec, seed);
    TrainConfig cfg = config;
    cfg.seed = seed;
    TrainResult tr = train(model_spec, cfg, data.train, data.test);
    ExperimentResult out;
    out.records = std::move(tr.records);
    out.params = std::move(tr.params);
    out.diverged = tr.diverged;
    out.report = correlate_records(out.records, cfg.stabilization_window, cfg.stabilization_tolerance, seed.seed);
    return out;
}

}  // namespace riskbounds
