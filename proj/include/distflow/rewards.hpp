// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

// Distribution-alignment rewards over pooled feature matrices (one sample per
// row). Larger rewards mean closer distributions; the alignment loss is the
// negated reward.

#pragma once

#include <variant>

#include "distflow/autodiff.hpp"

namespace distflow {

/// Polynomial kernel k(x, y) = (<x, y> / dim_scale + c)^degree.
struct KernelConfig {
    double c = 1.0;
    int degree = 3;
    int dim_scale = 64;

    void validate() const;
};

template <typename D1, typename D2>
double poly_kernel(const Eigen::MatrixBase<D1>& x, const Eigen::MatrixBase<D2>& y, const KernelConfig& k) {
    require(x.size() == y.size(), "poly_kernel: lengths ", x.size(), " and ", y.size(), " differ");
    const double inner = x.reshaped().dot(y.reshaped());
    return std::pow(inner / k.dim_scale + k.c, k.degree);
}

/// Elementwise kernel over all row pairs: K(i, j) = k(x_i, y_j).
Matrix kernel_matrix(const Matrix& x, const Matrix& y, const KernelConfig& k);

/// Unbiased estimate of -MMD^2:
///   -1/(M(M-1)) sum_{i!=j} k(x_i,x_j) + 2/(MN) sum_ij k(x_i,y_j) - 1/(N(N-1)) sum_{i!=j} k(y_i,y_j)
double mmd_reward(const Matrix& f_out, const Matrix& f_ref, const KernelConfig& k);
/// Tracked version; f_ref is a constant.
ad::Var mmd_reward(ad::Var f_out, const Matrix& f_ref, const KernelConfig& k);

/// softmax(mean of rows); the distribution compared by the SKL reward.
RowVector mean_softmax(const Matrix& f);

/// -1/2 [KL(p || q) + KL(q || p)] with p, q the softmaxed column means and a
/// 1e-12 floor inside the logarithms. Symmetric in its arguments bit for bit.
double skl_reward(const Matrix& f_out, const Matrix& f_ref);
ad::Var skl_reward(ad::Var f_out, const Matrix& f_ref);

struct MmdKind {
    KernelConfig kernel;
};
struct SklKind {};
using RewardKind = std::variant<MmdKind, SklKind>;

/// L_A = -reward.
ad::Var alignment_loss(ad::Var f_out, const Matrix& f_ref, const RewardKind& kind);
double alignment_loss(const Matrix& f_out, const Matrix& f_ref, const RewardKind& kind);

}  // namespace distflow
