#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "riskbounds/dataset.hpp"
#include "riskbounds/linalg.hpp"
#include "riskbounds/model.hpp"
#include "riskbounds/prob.hpp"

namespace riskbounds {

/// Gradient columns with norm at or below this are excluded from the
/// per-parameter decomposition.
inline constexpr double kZeroGradNorm = 1e-12;

/**
 * Squared cross-product norm ||a x x||^2 = (1/2) sum_ij (a_i x_j - a_j x_i)^2.
 * Equals ||a||^2 ||x||^2 - (a.x)^2; the pairwise sum is used so the result
 * is a sum of squares with no cancellation.
 */
inline double cross_norm_sq(const std::vector<double>& a, const std::vector<double>& x) {
    if (a.size() != x.size()) throw std::invalid_argument("cross_norm_sq: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double t = a[i] * x[j] - a[j] * x[i];
            s += t * t;
        }
    return s;
}

/// |  ||Ax||^2 - ( ||A||_F^2 ||x||^2 - sum_rows ||a_k x x||^2 )  |.
inline double lagrange_identity_residual(const linalg::Matrix& a, const std::vector<double>& x) {
    if (x.size() != a.cols) throw std::invalid_argument("lagrange_identity_residual: dimension mismatch");
    const double lhs = linalg::norm_sq(linalg::matvec(a, x));
    double cross_sum = 0.0;
    std::vector<double> row(a.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) row[j] = a(i, j);
        cross_sum += cross_norm_sq(row, x);
    }
    const double rhs = linalg::frobenius_norm_sq(a) * linalg::norm_sq(x) - cross_sum;
    return std::abs(lhs - rhs);
}

/**
 * Exact split of ||q - p||^2 into the normalized KL-gradient part F and the
 * cross-product remainder G, plus the per-parameter variant where each
 * column's own norm is the denominator.
 */
struct FitDecomposition {
    double f_term = 0.0;
    double g_term = 0.0;
    double residual_sq = 0.0;             // ||q_yx - p_yx||_2^2
    std::vector<double> per_param_f;      // F(theta_j, .), NaN on excluded j
    std::vector<double> per_param_g;      // G(theta_j, .), NaN on excluded j
    std::vector<std::size_t> zero_grad_params;
};

inline FitDecomposition decompose(const ModelSpec& spec, const ParamVector& params, const std::vector<double>& x,
                                  const Pmf& q_yx) {
    if (q_yx.probs.size() != spec.num_classes) throw std::invalid_argument("decompose: q dimension mismatch");
    const JacobianMatrix jac = jacobian(spec, params, x);
    const Pmf p = predictive(spec, params, x);
    const std::size_t k = spec.num_classes;
    const std::size_t m = jac.cols;

    std::vector<double> diff(k);
    for (std::size_t i = 0; i < k; ++i) diff[i] = q_yx.probs[i] - p.probs[i];

    const double fro_sq = linalg::frobenius_norm_sq(jac);
    if (!(fro_sq > 0.0)) throw std::runtime_error("decompose: zero Jacobian (degenerate model)");

    FitDecomposition d;
    d.residual_sq = linalg::norm_sq(diff);
    d.per_param_f.assign(m, std::numeric_limits<double>::quiet_NaN());
    d.per_param_g.assign(m, std::numeric_limits<double>::quiet_NaN());

    double grad_norm_sq = 0.0;  // ||J^T diff||^2 accumulated columnwise
    double cross_total = 0.0;
    std::vector<double> col(k);
    for (std::size_t j = 0; j < m; ++j) {
        double col_norm_sq = 0.0;
        double col_dot = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            col[i] = jac(i, j);
            col_norm_sq += col[i] * col[i];
            col_dot += col[i] * diff[i];
        }
        const double cross = cross_norm_sq(col, diff);
        grad_norm_sq += col_dot * col_dot;
        cross_total += cross;
        if (std::sqrt(col_norm_sq) > kZeroGradNorm) {
            d.per_param_f[j] = col_dot * col_dot / col_norm_sq;
            d.per_param_g[j] = cross / col_norm_sq;
        } else {
            d.zero_grad_params.push_back(j);
        }
    }
    d.f_term = grad_norm_sq / fro_sq;
    d.g_term = cross_total / fro_sq;
    return d;
}

// ---------------------------------------------------------------------------
// Dataset-level fitting report
// ---------------------------------------------------------------------------

/// One row per distinct input, for streaming alongside a FitReport.
struct InputDiagnostic {
    std::size_t index = 0;
    double residual_sq = 0.0;
    double f_term = 0.0;
    double g_term = 0.0;
    double lambda_max = 0.0;
};

struct FitReport {
    double fit = 0.0;             // |R(f,p) - R(f,q)|
    double fit_normalized = 0.0;  // fit / sqrt(E_X ||l||^2)
    double bound = 0.0;           // sqrt(E_X[F + G])
    double loss_l2_mean = 0.0;    // E_X ||l(f(x))||_2^2
    double g_min = 0.0;           // min_j E_X G(theta_j, .), excluded set removed
    double lambda_max_max = 0.0;  // max_x lambda_max(eNTK)
};

/**
 * Fitting error, its normalized form, the sqrt(E_X[F+G]) bound, and the
 * G_M statistic over a dataset. Expectations weight by q_X. Optionally
 * fills per-input rows.
 */
inline FitReport fit_report(const ModelSpec& spec, const ParamVector& params, const Dataset& dataset,
                            const LossSpec& loss, std::vector<InputDiagnostic>* rows = nullptr) {
    dataset.validate();
    if (dataset.num_classes() != spec.num_classes) throw std::invalid_argument("fit_report: class count mismatch");
    const std::size_t m = spec.param_count();

    double model_minus_emp = 0.0;
    double loss_l2_mean = 0.0;
    double mean_f = 0.0;
    double mean_g = 0.0;
    double lambda_max_max = 0.0;
    std::vector<double> mean_g_per_param(m, 0.0);
    std::vector<bool> excluded(m, false);
    if (rows) rows->clear();

    for (std::size_t idx = 0; idx < dataset.entries.size(); ++idx) {
        const auto& entry = dataset.entries[idx];
        const Logits f = forward(spec, params, entry.x);
        const std::vector<double> lvec = loss_vector(loss, f);
        for (double v : lvec)
            if (!std::isfinite(v)) throw std::runtime_error("fit_report: non-finite loss value");
        const Pmf p = softmax(f).pmf;

        double pl = 0.0;
        double ql = 0.0;
        double l2 = 0.0;
        for (std::size_t y = 0; y < lvec.size(); ++y) {
            pl += p.probs[y] * lvec[y];
            ql += entry.q_yx.probs[y] * lvec[y];
            l2 += lvec[y] * lvec[y];
        }
        model_minus_emp += entry.weight * (pl - ql);
        loss_l2_mean += entry.weight * l2;

        const FitDecomposition dec = decompose(spec, params, entry.x, entry.q_yx);
        mean_f += entry.weight * dec.f_term;
        mean_g += entry.weight * dec.g_term;
        for (std::size_t j : dec.zero_grad_params) excluded[j] = true;
        for (std::size_t j = 0; j < m; ++j)
            if (!std::isnan(dec.per_param_g[j])) mean_g_per_param[j] += entry.weight * dec.per_param_g[j];

        const double lmax = entk_lambda_max(spec, params, entry.x);
        lambda_max_max = std::max(lambda_max_max, lmax);
        if (rows) rows->push_back(InputDiagnostic{idx, dec.residual_sq, dec.f_term, dec.g_term, lmax});
    }

    FitReport rep;
    rep.fit = std::abs(model_minus_emp);
    rep.loss_l2_mean = loss_l2_mean;
    if (!(loss_l2_mean > 0.0)) throw std::runtime_error("fit_report: loss identically zero (degenerate normalization)");
    rep.fit_normalized = rep.fit / std::sqrt(loss_l2_mean);
    rep.bound = std::sqrt(mean_f + mean_g);
    rep.lambda_max_max = lambda_max_max;
    rep.g_min = kInfinity;
    for (std::size_t j = 0; j < m; ++j)
        if (!excluded[j]) rep.g_min = std::min(rep.g_min, mean_g_per_param[j]);
    if (!std::isfinite(rep.g_min)) rep.g_min = std::numeric_limits<double>::quiet_NaN();
    return rep;
}

/// sqrt(E_X ||p-q||^2 * E_X ||l||^2) - fit; non-negative by Cauchy-Schwarz.
inline double cauchy_schwarz_gap(const Dataset& dataset, const ModelSpec& spec, const ParamVector& params,
                                 const LossSpec& loss) {
    dataset.validate();
    double mean_residual = 0.0;
    double loss_l2_mean = 0.0;
    double model_minus_emp = 0.0;
    for (const auto& entry : dataset.entries) {
        const Logits f = forward(spec, params, entry.x);
        const std::vector<double> lvec = loss_vector(loss, f);
        const Pmf p = softmax(f).pmf;
        double pl = 0.0;
        double ql = 0.0;
        double l2 = 0.0;
        double r2 = 0.0;
        for (std::size_t y = 0; y < lvec.size(); ++y) {
            pl += p.probs[y] * lvec[y];
            ql += entry.q_yx.probs[y] * lvec[y];
            l2 += lvec[y] * lvec[y];
            const double diff = entry.q_yx.probs[y] - p.probs[y];
            r2 += diff * diff;
        }
        model_minus_emp += entry.weight * (pl - ql);
        loss_l2_mean += entry.weight * l2;
        mean_residual += entry.weight * r2;
    }
    return std::sqrt(mean_residual * loss_l2_mean) - std::abs(model_minus_emp);
}

/// lambda_max ||q-p||^2 / trace(eNTK) - F; non-negative slack of the
/// largest-eigenvalue bound on F.
inline double f_term_entk_bound_gap(const ModelSpec& spec, const ParamVector& params, const std::vector<double>& x,
                                    const Pmf& q_yx) {
    const FitDecomposition dec = decompose(spec, params, x, q_yx);
    const EntkMatrix kernel = entk(spec, params, x);
    const double tr = linalg::trace(kernel.gram);
    const double lmax = lambda_max_psd(kernel.gram);
    return lmax * dec.residual_sq / tr - dec.f_term;
}

/**
 * G_M over growing parameter prefixes: for each requested prefix size k,
 * the minimum of E_X G(theta_j, .) over j < k (zero-gradient parameters
 * excluded). Non-increasing in k by set inclusion.
 */
inline std::vector<double> g_min_monotonicity(const ModelSpec& spec, const ParamVector& params,
                                              const Dataset& dataset, const std::vector<std::size_t>& prefix_sizes) {
    dataset.validate();
    const std::size_t m = spec.param_count();
    for (std::size_t i = 0; i < prefix_sizes.size(); ++i) {
        if (prefix_sizes[i] == 0 || prefix_sizes[i] > m)
            throw std::invalid_argument("g_min_monotonicity: prefix size out of range");
        if (i > 0 && prefix_sizes[i] <= prefix_sizes[i - 1])
            throw std::invalid_argument("g_min_monotonicity: prefix sizes must be increasing");
    }
    std::vector<double> mean_g(m, 0.0);
    std::vector<bool> excluded(m, false);
    for (const auto& entry : dataset.entries) {
        const FitDecomposition dec = decompose(spec, params, entry.x, entry.q_yx);
        for (std::size_t j : dec.zero_grad_params) excluded[j] = true;
        for (std::size_t j = 0; j < m; ++j)
            if (!std::isnan(dec.per_param_g[j])) mean_g[j] += entry.weight * dec.per_param_g[j];
    }
    std::vector<double> out;
    out.reserve(prefix_sizes.size());
    for (std::size_t k : prefix_sizes) {
        double best = kInfinity;
        for (std::size_t j = 0; j < k; ++j)
            if (!excluded[j]) best = std::min(best, mean_g[j]);
        out.push_back(best);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hessian / eNTK spectral check
// ---------------------------------------------------------------------------

/**
 * Spectral comparison between the finite-difference Hessian of
 * E_X D_KL(q_yx || p_yx) and its exact B + C + F assembly, where
 *   B_x = sum_y q_y grad f_y grad f_y^T        (weighted tangent Gram)
 *   C_x = sum_y q_y (-hess p_y / p_y)          (curvature of p)
 *   F_x = -a b^T - b a^T + b b^T, a = J^T q, b = J^T p (log-partition part).
 */
struct HessianCheck {
    double fd_lambda_max = 0.0;          // lambda_max of the FD Hessian
    double b_lambda_max_max = 0.0;       // max_x lambda_max(B_x)
    double entk_lambda_max_max = 0.0;    // max_x lambda_max(eNTK(x))
    double decomposition_residual = 0.0; // ||H_fd - E_X[B+C+F]||_F
    double fd_frobenius = 0.0;           // ||H_fd||_F, for relative residuals
    double symmetry_residual = 0.0;      // ||H_fd - H_fd^T||_F / (1 + ||H_fd||_F)
    double side_grad_norm_max = 0.0;     // max_x ||J^T q_yx|| (gates the domination claim)
    double side_grad_p_norm_max = 0.0;   // max_x ||J^T p_yx||, reported alongside
    double side_c_norm = 0.0;            // ||E_X C_x||_F

    /// Both stationarity side conditions hold, so lambda_max(H) should be
    /// dominated by the worst-case eNTK eigenvalue.
    bool side_conditions_hold(double tol = 1e-6) const {
        return side_grad_norm_max < tol && side_c_norm < tol;
    }
};

namespace detail {

// Rows are the exact gradients grad_theta p_y = J^T (p_y (e_y - p)).
inline linalg::Matrix predictive_grads(const ModelSpec& spec, const ParamVector& params,
                                       const std::vector<double>& x) {
    const JacobianMatrix jac = jacobian(spec, params, x);
    const Pmf p = predictive(spec, params, x);
    const std::size_t k = spec.num_classes;
    linalg::Matrix out(k, jac.cols);
    std::vector<double> delta(k);
    for (std::size_t y = 0; y < k; ++y) {
        for (std::size_t i = 0; i < k; ++i) delta[i] = p.probs[y] * ((i == y ? 1.0 : 0.0) - p.probs[i]);
        for (std::size_t j = 0; j < jac.cols; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < k; ++i) s += jac(i, j) * delta[i];
            out(y, j) = s;
        }
    }
    return out;
}

// Gradient of the dataset ERF objective E_X D_KL(q || p) = E_X J^T (p - q).
inline std::vector<double> erf_gradient(const ModelSpec& spec, const ParamVector& params, const Dataset& dataset) {
    std::vector<double> grad(spec.param_count(), 0.0);
    for (const auto& entry : dataset.entries) {
        const JacobianMatrix jac = jacobian(spec, params, entry.x);
        const Pmf p = predictive(spec, params, entry.x);
        for (std::size_t i = 0; i < spec.num_classes; ++i) {
            const double w = entry.weight * (p.probs[i] - entry.q_yx.probs[i]);
            for (std::size_t j = 0; j < jac.cols; ++j) grad[j] += w * jac(i, j);
        }
    }
    return grad;
}

}  // namespace detail

inline HessianCheck hessian_check(const ModelSpec& spec, const ParamVector& params, const Dataset& dataset,
                                  double fd_step = 1e-4) {
    dataset.validate();
    spec.validate();
    params.validate(spec);
    const std::size_t m = spec.param_count();
    if (m > 500) throw std::invalid_argument("hessian_check: m must be <= 500 for the dense FD Hessian");
    const std::size_t k = spec.num_classes;

    // FD Hessian of the ERF objective: central differences of the exact gradient.
    linalg::Matrix h_fd(m, m);
    {
        ParamVector t = params;
        for (std::size_t c = 0; c < m; ++c) {
            const double saved = t.theta[c];
            t.theta[c] = saved + fd_step;
            const std::vector<double> gp = detail::erf_gradient(spec, t, dataset);
            t.theta[c] = saved - fd_step;
            const std::vector<double> gm = detail::erf_gradient(spec, t, dataset);
            t.theta[c] = saved;
            for (std::size_t r = 0; r < m; ++r) h_fd(r, c) = (gp[r] - gm[r]) / (2.0 * fd_step);
        }
    }

    HessianCheck chk;
    chk.fd_frobenius = std::sqrt(linalg::frobenius_norm_sq(h_fd));
    {
        double asym = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                const double d = h_fd(i, j) - h_fd(j, i);
                asym += 2.0 * d * d;
            }
        chk.symmetry_residual = std::sqrt(asym) / (1.0 + chk.fd_frobenius);
        if (chk.symmetry_residual > 1e-4)
            throw std::runtime_error("hessian_check: FD Hessian symmetry residual above 1e-4");
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                const double v = 0.5 * (h_fd(i, j) + h_fd(j, i));
                h_fd(i, j) = v;
                h_fd(j, i) = v;
            }
    }
    chk.fd_lambda_max = linalg::sym_eigenvalues(h_fd).back();

    // Exact-plus-FD assembly of E_X [B_x + C_x + F_x].
    linalg::Matrix assembled(m, m);
    linalg::Matrix c_mean(m, m);
    for (const auto& entry : dataset.entries) {
        const JacobianMatrix jac = jacobian(spec, params, entry.x);
        const Pmf p = predictive(spec, params, entry.x);
        const auto& q = entry.q_yx.probs;

        // lambda_max(B_x) via the weighted label-space Gram
        // sqrt(q_i) sqrt(q_j) (J J^T)_ij, which shares B_x's nonzero spectrum.
        {
            const linalg::Matrix g = linalg::gram(jac);
            linalg::Matrix w(k, k);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) w(i, j) = std::sqrt(q[i] * q[j]) * g(i, j);
            chk.b_lambda_max_max = std::max(chk.b_lambda_max_max, linalg::sym_lambda_max(w));
            chk.entk_lambda_max_max = std::max(chk.entk_lambda_max_max, lambda_max_psd(g));
        }

        // Side condition 1 in both weightings: a = J^T q and b = J^T p.
        std::vector<double> a(m, 0.0);
        std::vector<double> b(m, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                a[j] += q[i] * jac(i, j);
                b[j] += p.probs[i] * jac(i, j);
            }
        chk.side_grad_norm_max = std::max(chk.side_grad_norm_max, std::sqrt(linalg::norm_sq(a)));
        chk.side_grad_p_norm_max = std::max(chk.side_grad_p_norm_max, std::sqrt(linalg::norm_sq(b)));

        // B_x and F_x are exact.
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) {
                double bx = 0.0;
                for (std::size_t i = 0; i < k; ++i) bx += q[i] * jac(i, r) * jac(i, c);
                const double fx = -a[r] * b[c] - b[r] * a[c] + b[r] * b[c];
                assembled(r, c) += entry.weight * (bx + fx);
            }

        // C_x = sum_y q_y (-hess p_y / p_y); hess p_y columns from central
        // differences of the exact predictive gradients.
        ParamVector t = params;
        for (std::size_t c = 0; c < m; ++c) {
            const double saved = t.theta[c];
            t.theta[c] = saved + fd_step;
            const linalg::Matrix gp = detail::predictive_grads(spec, t, entry.x);
            t.theta[c] = saved - fd_step;
            const linalg::Matrix gm = detail::predictive_grads(spec, t, entry.x);
            t.theta[c] = saved;
            for (std::size_t y = 0; y < k; ++y) {
                if (!(q[y] > 0.0)) continue;
                const double scale = entry.weight * q[y] / p.probs[y];
                for (std::size_t r = 0; r < m; ++r) {
                    const double hess_rc = (gp(y, r) - gm(y, r)) / (2.0 * fd_step);
                    assembled(r, c) -= scale * hess_rc;
                    c_mean(r, c) -= scale * hess_rc;
                }
            }
        }
    }
    chk.side_c_norm = std::sqrt(linalg::frobenius_norm_sq(c_mean));

    double resid = 0.0;
    for (std::size_t i = 0; i < m * m; ++i) {
        const double d = h_fd.data[i] - assembled.data[i];
        resid += d * d;
    }
    chk.decomposition_residual = std::sqrt(resid);
    return chk;
}

}  // namespace riskbounds
