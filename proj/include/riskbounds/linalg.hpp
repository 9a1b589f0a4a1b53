#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace riskbounds::linalg {

/// Dense row-major matrix of doubles. Desk-scale only; no views, no BLAS.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

inline std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
    if (x.size() != a.cols) throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<double> y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

/// y = A^T x.
inline std::vector<double> matvec_transposed(const Matrix& a, const std::vector<double>& x) {
    if (x.size() != a.rows) throw std::invalid_argument("matvec_transposed: dimension mismatch");
    std::vector<double> y(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) y[j] += a(i, j) * x[i];
    return y;
}

/// Gram matrix A A^T (rows x rows, symmetric).
inline Matrix gram(const Matrix& a) {
    Matrix g(a.rows, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = i; j < a.rows; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * a(j, k);
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

inline double frobenius_norm_sq(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return s;
}

inline double trace(const Matrix& a) {
    if (a.rows != a.cols) throw std::invalid_argument("trace: matrix not square");
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) s += a(i, i);
    return s;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(const std::vector<double>& a) { return dot(a, a); }

/**
 * All eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
 * returned in ascending order. Intended for the small dense problems this
 * library works at (n up to a few hundred).
 */
inline std::vector<double> sym_eigenvalues(const Matrix& a_in, double tol = 1e-13, int max_sweeps = 64) {
    if (a_in.rows != a_in.cols) throw std::invalid_argument("sym_eigenvalues: matrix not square");
    const std::size_t n = a_in.rows;
    Matrix a = a_in;
    // Symmetrize against harmless rounding asymmetry in the input.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }
    double scale = 0.0;
    for (double v : a.data) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return std::vector<double>(n, 0.0);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= tol * scale * static_cast<double>(n)) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= tol * scale * 1e-3) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

inline double sym_lambda_max(const Matrix& a) { return sym_eigenvalues(a).back(); }
inline double sym_lambda_min(const Matrix& a) { return sym_eigenvalues(a).front(); }

/**
 * Largest eigenvalue of a PSD symmetric matrix by power iteration.
 * Converges when successive Rayleigh quotients differ by less than tol
 * in relative terms; throws after max_iters without convergence.
 */
inline double power_iteration_lambda_max(const Matrix& a, double tol = 1e-10, int max_iters = 10000) {
    if (a.rows != a.cols) throw std::invalid_argument("power_iteration_lambda_max: matrix not square");
    const std::size_t n = a.rows;
    if (n == 0) return 0.0;
    double scale = 0.0;
    for (double v : a.data) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0.0;

    // Deterministic start with staggered entries so it is not orthogonal
    // to the leading eigenvector of any fixed small matrix family.
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.37 * std::sin(static_cast<double>(i + 1));
    double vn = std::sqrt(norm_sq(v));
    for (double& x : v) x /= vn;

    double lambda_prev = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        std::vector<double> w = matvec(a, v);
        const double lambda = dot(v, w);
        const double wn = std::sqrt(norm_sq(w));
        if (wn == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
        if (it > 1 && std::abs(lambda - lambda_prev) <= tol * std::max(1.0, std::abs(lambda))) return lambda;
        lambda_prev = lambda;
    }
    throw std::runtime_error("power_iteration_lambda_max: no convergence after " + std::to_string(max_iters) +
                             " iterations");
}

}  // namespace riskbounds::linalg
