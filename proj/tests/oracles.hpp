// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations, written independently of the library.

#pragma once

#include <cmath>
#include <vector>

#include "distflow/common.hpp"

namespace distflow::testing {

inline double poly_kernel_loop(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j, double c,
                               int degree, double dim_scale) {
    double dot = 0.0;
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
        dot += a(i, k) * b(j, k);
    }
    double base = dot / dim_scale + c;
    double out = 1.0;
    for (int p = 0; p < degree; ++p) {
        out *= base;
    }
    return out;
}

/// Unbiased -MMD^2 by explicit loops over all pairs.
inline double mmd_reward_loop(const Matrix& x, const Matrix& y, double c, int degree, double dim_scale) {
    const Eigen::Index m = x.rows();
    const Eigen::Index n = y.rows();
    double xx = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i != j) {
                xx += poly_kernel_loop(x, i, x, j, c, degree, dim_scale);
            }
        }
    }
    double xy = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            xy += poly_kernel_loop(x, i, y, j, c, degree, dim_scale);
        }
    }
    double yy = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) {
                yy += poly_kernel_loop(y, i, y, j, c, degree, dim_scale);
            }
        }
    }
    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    return -xx / (md * (md - 1)) + 2.0 * xy / (md * nd) - yy / (nd * (nd - 1));
}

/// KL(p || q) by direct summation over strictly positive probabilities.
inline double kl_direct(const std::vector<double>& p, const std::vector<double>& q) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        total += p[i] * std::log(p[i] / q[i]);
    }
    return total;
}

}  // namespace distflow::testing
