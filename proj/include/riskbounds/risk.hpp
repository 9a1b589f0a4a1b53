#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "riskbounds/complexity.hpp"
#include "riskbounds/dataset.hpp"
#include "riskbounds/fitdiag.hpp"
#include "riskbounds/model.hpp"
#include "riskbounds/prob.hpp"

namespace riskbounds {

/// Which joint distribution the risk functional integrates over.
enum class ConditionalSource { EmpiricalQ, ModelP, ExternalQBar };

/**
 * R_l(f_theta, .) = E over the selected joint distribution of l(f(x), y).
 * EmpiricalQ uses the dataset's q_X x q_{Y|x}; ModelP replaces the
 * conditional with the softmax predictive; ExternalQBar integrates over a
 * supplied joint. Returns +inf if an unbounded loss hits an infinite value.
 */
inline double risk(const ModelSpec& spec, const ParamVector& params, const Dataset& dataset,
                   ConditionalSource source, const LossSpec& loss, const JointPmf* q_bar = nullptr) {
    dataset.validate();
    if (dataset.num_classes() != spec.num_classes) throw std::invalid_argument("risk: class count mismatch");

    if (source == ConditionalSource::ExternalQBar) {
        if (q_bar == nullptr) throw std::invalid_argument("risk: external source requires a joint distribution");
        q_bar->validate();
        if (q_bar->num_classes() != spec.num_classes)
            throw std::invalid_argument("risk: external joint class count mismatch");
        double acc = 0.0;
        for (std::size_t g = 0; g < q_bar->features.size(); ++g) {
            double row_mass = 0.0;
            for (std::size_t y = 0; y < q_bar->num_classes(); ++y) row_mass += q_bar->probs(g, y);
            if (row_mass == 0.0) continue;
            const std::vector<double> lvec = loss_vector(loss, forward(spec, params, q_bar->features[g]));
            for (std::size_t y = 0; y < lvec.size(); ++y) acc += q_bar->probs(g, y) * lvec[y];
        }
        return acc;
    }

    double acc = 0.0;
    for (const auto& entry : dataset.entries) {
        const Logits f = forward(spec, params, entry.x);
        const std::vector<double> lvec = loss_vector(loss, f);
        const std::vector<double>& cond =
            (source == ConditionalSource::ModelP) ? softmax(f).pmf.probs : entry.q_yx.probs;
        for (std::size_t y = 0; y < lvec.size(); ++y) acc += entry.weight * cond[y] * lvec[y];
    }
    return acc;
}

/**
 * Expected rate function E_{X~q_X} D_KL(q_yx || p_yx). Identically the
 * softmax-cross-entropy risk under q minus H_q(Y|X).
 */
inline double erf_risk(const ModelSpec& spec, const ParamVector& params, const Dataset& dataset) {
    dataset.validate();
    double acc = 0.0;
    for (const auto& entry : dataset.entries)
        acc += entry.weight * detail::kl_unchecked(entry.q_yx.probs, predictive(spec, params, entry.x).probs);
    return acc;
}

/// |risk under the external joint - risk under the dataset|. Every dataset
/// feature must appear in the external joint's grid.
inline double gen_error(const ModelSpec& spec, const ParamVector& params, const Dataset& dataset,
                        const JointPmf& q_bar, const LossSpec& loss) {
    dataset.validate();
    q_bar.validate();
    for (const auto& entry : dataset.entries)
        if (q_bar.find_feature(entry.x) == static_cast<std::size_t>(-1))
            throw std::domain_error("gen_error: dataset feature outside the external joint's support");
    const double r_ext = risk(spec, params, dataset, ConditionalSource::ExternalQBar, loss, &q_bar);
    const double r_emp = risk(spec, params, dataset, ConditionalSource::EmpiricalQ, loss);
    return std::abs(r_ext - r_emp);
}

/**
 * Assembled expected-risk bound: model risk plus the fitting bound plus
 * the complexity tail radius. With probability at least 1 - delta over
 * the resampling of the data, R_l(f, q_bar) stays below total_bound.
 */
struct RiskBoundReport {
    double model_risk = 0.0;
    double fit_bound_term = 0.0;  // sqrt(E_X[F+G]) * sqrt(E_X ||l||^2)
    double gen_epsilon = 0.0;     // L sqrt(C(q) / delta)
    double delta = 0.0;
    double total_bound = 0.0;
    double complexity = 0.0;      // C(q) in nats
    double loss_sup = 0.0;
    double suggested_regularization = 0.0;  // advisory: sqrt(C(q))
};

inline RiskBoundReport expected_risk_bound(const ModelSpec& spec, const ParamVector& params, const Dataset& dataset,
                                           const PosteriorSpec& posterior, double delta, const LossSpec& loss) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("expected_risk_bound: delta must be in (0,1)");
    if (!loss.bounded())
        throw std::invalid_argument("expected_risk_bound: loss must be bounded (clip cross-entropy or use zero-one)");
    const FitReport fit = fit_report(spec, params, dataset, loss);

    RiskBoundReport rep;
    rep.delta = delta;
    rep.loss_sup = loss.sup();
    rep.complexity = complexity_closed_form(posterior);
    rep.model_risk = risk(spec, params, dataset, ConditionalSource::ModelP, loss);
    rep.fit_bound_term = fit.bound * std::sqrt(fit.loss_l2_mean);
    rep.gen_epsilon = rep.loss_sup * std::sqrt(rep.complexity / delta);
    rep.total_bound = rep.model_risk + rep.fit_bound_term + rep.gen_epsilon;
    rep.suggested_regularization = std::sqrt(rep.complexity);
    return rep;
}

}  // namespace riskbounds
