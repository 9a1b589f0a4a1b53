#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskbounds/linalg.hpp"
#include "riskbounds/prob.hpp"
#include "riskbounds/rng.hpp"

namespace riskbounds {

enum class Activation { Tanh, Relu, Identity };

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::Identity: return "identity";
    }
    return "?";
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    if (s == "identity") return Activation::Identity;
    throw std::invalid_argument("unknown activation: " + s);
}

/**
 * Fully-connected classifier shape: input_dim -> hidden_dims... -> num_classes.
 * Hidden layers apply `activation`; the output layer is linear.
 */
struct ModelSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims;
    std::size_t num_classes = 0;
    Activation activation = Activation::Tanh;

    void validate() const {
        if (input_dim == 0) throw std::invalid_argument("ModelSpec: input_dim must be positive");
        if (num_classes == 0) throw std::invalid_argument("ModelSpec: num_classes must be positive");
        for (std::size_t h : hidden_dims)
            if (h == 0) throw std::invalid_argument("ModelSpec: hidden dims must be positive");
        // Dense per-input Jacobians cap the desk scale.
        if (param_count() > 100000) throw std::invalid_argument("ModelSpec: parameter count above the 1e5 cap");
    }

    /// Layer width sequence including input and output.
    std::vector<std::size_t> layer_dims() const {
        std::vector<std::size_t> dims;
        dims.push_back(input_dim);
        dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
        dims.push_back(num_classes);
        return dims;
    }

    /// Total parameter count m: per layer (fan_in + 1) * fan_out.
    std::size_t param_count() const {
        const auto dims = layer_dims();
        std::size_t m = 0;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) m += (dims[l] + 1) * dims[l + 1];
        return m;
    }
};

/// Flat parameter vector; per layer the weight block (out x in, row-major)
/// is followed by the bias block.
struct ParamVector {
    std::vector<double> theta;

    void validate(const ModelSpec& spec) const {
        if (theta.size() != spec.param_count())
            throw std::invalid_argument("ParamVector: length " + std::to_string(theta.size()) + " != m " +
                                        std::to_string(spec.param_count()));
        for (double v : theta)
            if (!std::isfinite(v)) throw std::invalid_argument("ParamVector: non-finite entry");
    }
};

using JacobianMatrix = linalg::Matrix;  // num_classes x m, row i = grad of logit i

/// Equal-input tangent kernel stored as the label-space Gram J J^T, which
/// shares the nonzero spectrum of J^T J and is tractable for any m.
struct EntkMatrix {
    linalg::Matrix gram;  // num_classes x num_classes, symmetric PSD
};

/// Fan-in scaled uniform init on [-1/sqrt(fan_in), 1/sqrt(fan_in)], seeded.
inline ParamVector init_params(const ModelSpec& spec, RngSeed seed) {
    spec.validate();
    CounterRng rng(seed);
    const auto dims = spec.layer_dims();
    ParamVector p;
    p.theta.reserve(spec.param_count());
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
        const std::size_t block = (dims[l] + 1) * dims[l + 1];
        for (std::size_t i = 0; i < block; ++i) p.theta.push_back(rng.uniform(-bound, bound));
    }
    return p;
}

namespace detail {

inline double activate(Activation a, double x) {
    switch (a) {
        case Activation::Tanh: return std::tanh(x);
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::Identity: return x;
    }
    return x;
}

// Derivative in terms of the pre-activation. relu's subgradient at 0 is 0.
inline double activate_grad(Activation a, double pre) {
    switch (a) {
        case Activation::Tanh: {
            const double t = std::tanh(pre);
            return 1.0 - t * t;
        }
        case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

/// Forward pass retaining everything a backward pass needs.
struct ForwardTrace {
    std::vector<std::vector<double>> inputs;   // activation entering each layer
    std::vector<std::vector<double>> preacts;  // pre-activation of each layer
    std::vector<double> logits;
};

inline ForwardTrace forward_trace(const ModelSpec& spec, const ParamVector& params, const std::vector<double>& x) {
    spec.validate();
    params.validate(spec);
    if (x.size() != spec.input_dim) throw std::invalid_argument("forward: input dimension mismatch");
    const auto dims = spec.layer_dims();
    const std::size_t num_layers = dims.size() - 1;

    ForwardTrace tr;
    tr.inputs.resize(num_layers);
    tr.preacts.resize(num_layers);
    std::vector<double> cur = x;
    std::size_t offset = 0;
    for (std::size_t l = 0; l < num_layers; ++l) {
        const std::size_t in = dims[l];
        const std::size_t out = dims[l + 1];
        tr.inputs[l] = cur;
        std::vector<double> pre(out);
        const double* w = params.theta.data() + offset;
        const double* b = w + in * out;
        for (std::size_t i = 0; i < out; ++i) {
            double s = b[i];
            const double* row = w + i * in;
            for (std::size_t j = 0; j < in; ++j) s += row[j] * cur[j];
            pre[i] = s;
        }
        tr.preacts[l] = pre;
        const bool last = (l + 1 == num_layers);
        cur.resize(out);
        for (std::size_t i = 0; i < out; ++i) cur[i] = last ? pre[i] : activate(spec.activation, pre[i]);
        offset += (in + 1) * out;
    }
    for (double v : cur)
        if (!std::isfinite(v)) throw std::runtime_error("forward: non-finite intermediate value");
    tr.logits = std::move(cur);
    return tr;
}

/// Backward pass: accumulates J^T delta for an output-space delta.
inline std::vector<double> backward_from_trace(const ModelSpec& spec, const ParamVector& params,
                                               const ForwardTrace& tr, const std::vector<double>& delta_out) {
    const auto dims = spec.layer_dims();
    const std::size_t num_layers = dims.size() - 1;
    std::vector<double> grad(params.theta.size(), 0.0);

    std::vector<std::size_t> offsets(num_layers);
    std::size_t offset = 0;
    for (std::size_t l = 0; l < num_layers; ++l) {
        offsets[l] = offset;
        offset += (dims[l] + 1) * dims[l + 1];
    }

    std::vector<double> delta = delta_out;  // gradient w.r.t. layer pre-activation
    for (std::size_t li = num_layers; li-- > 0;) {
        const std::size_t in = dims[li];
        const std::size_t out = dims[li + 1];
        const std::vector<double>& input = tr.inputs[li];
        double* gw = grad.data() + offsets[li];
        double* gb = gw + in * out;
        for (std::size_t i = 0; i < out; ++i) {
            const double d = delta[i];
            gb[i] = d;
            double* row = gw + i * in;
            for (std::size_t j = 0; j < in; ++j) row[j] = d * input[j];
        }
        if (li == 0) break;
        const double* w = params.theta.data() + offsets[li];
        std::vector<double> prev(in, 0.0);
        for (std::size_t i = 0; i < out; ++i) {
            const double d = delta[i];
            const double* row = w + i * in;
            for (std::size_t j = 0; j < in; ++j) prev[j] += d * row[j];
        }
        for (std::size_t j = 0; j < in; ++j) prev[j] *= activate_grad(spec.activation, tr.preacts[li - 1][j]);
        delta = std::move(prev);
    }
    return grad;
}

}  // namespace detail

/// Logits f_theta(x).
inline Logits forward(const ModelSpec& spec, const ParamVector& params, const std::vector<double>& x) {
    return Logits(detail::forward_trace(spec, params, x).logits);
}

/// softmax(f_theta(x)).
inline Pmf predictive(const ModelSpec& spec, const ParamVector& params, const std::vector<double>& x) {
    return softmax(forward(spec, params, x)).pmf;
}

/// Exact Jacobian of the logits, one backward accumulation per logit.
inline JacobianMatrix jacobian(const ModelSpec& spec, const ParamVector& params, const std::vector<double>& x) {
    const detail::ForwardTrace tr = detail::forward_trace(spec, params, x);
    const std::size_t k = spec.num_classes;
    JacobianMatrix jac(k, params.theta.size());
    std::vector<double> delta(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        delta.assign(k, 0.0);
        delta[i] = 1.0;
        const std::vector<double> g = detail::backward_from_trace(spec, params, tr, delta);
        for (std::size_t j = 0; j < g.size(); ++j) jac(i, j) = g[j];
    }
    return jac;
}

/// J^T delta in a single backward pass (used by the training loop).
inline std::vector<double> vjp(const ModelSpec& spec, const ParamVector& params, const std::vector<double>& x,
                               const std::vector<double>& delta) {
    if (delta.size() != spec.num_classes) throw std::invalid_argument("vjp: delta size mismatch");
    const detail::ForwardTrace tr = detail::forward_trace(spec, params, x);
    return detail::backward_from_trace(spec, params, tr, delta);
}

/**
 * Gradient of D_KL(q_yx || p_yx) w.r.t. theta, computed as J^T (q - p)
 * through the explicit Jacobian.
 */
inline std::vector<double> kl_grad(const ModelSpec& spec, const ParamVector& params, const std::vector<double>& x,
                                   const Pmf& q_yx) {
    if (q_yx.probs.size() != spec.num_classes) throw std::invalid_argument("kl_grad: q dimension mismatch");
    const JacobianMatrix jac = jacobian(spec, params, x);
    const Pmf p = predictive(spec, params, x);
    std::vector<double> diff(spec.num_classes);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = q_yx.probs[i] - p.probs[i];
    return linalg::matvec_transposed(jac, diff);
}

/// Equal-input tangent kernel as the label-space Gram J J^T.
inline EntkMatrix entk(const ModelSpec& spec, const ParamVector& params, const std::vector<double>& x) {
    return EntkMatrix{linalg::gram(jacobian(spec, params, x))};
}

inline constexpr std::size_t kDenseEigensolveMaxDim = 64;

/// Largest eigenvalue of a symmetric PSD matrix: dense solve when small,
/// power iteration beyond kDenseEigensolveMaxDim.
inline double lambda_max_psd(const linalg::Matrix& m) {
    if (m.rows <= kDenseEigensolveMaxDim) return linalg::sym_lambda_max(m);
    return linalg::power_iteration_lambda_max(m);
}

inline double entk_lambda_max(const ModelSpec& spec, const ParamVector& params, const std::vector<double>& x) {
    return lambda_max_psd(entk(spec, params, x).gram);
}

}  // namespace riskbounds
