// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/rewards.hpp"

#include <algorithm>

namespace distflow {

namespace {

constexpr double kLogFloor = 1e-12;

Matrix gram(const Matrix& x, const Matrix& y, const KernelConfig& k) {
    return ((x * y.transpose()) / static_cast<double>(k.dim_scale)).array() + k.c;
}

double off_diagonal_sum(const Matrix& m) { return m.sum() - m.trace(); }

void check_mmd_inputs(const Matrix& f_out, const Matrix& f_ref, const KernelConfig& k) {
    k.validate();
    require(f_out.rows() >= 2 && f_ref.rows() >= 2, "mmd_reward needs at least 2 rows per set, got ",
            f_out.rows(), " and ", f_ref.rows());
    require(f_out.cols() == f_ref.cols(), "mmd_reward: feature widths ", f_out.cols(), " and ", f_ref.cols(),
            " differ");
    require_finite(f_out, "mmd_reward: F_out");
    require_finite(f_ref, "mmd_reward: F_ref");
}

double kl(const RowVector& p, const RowVector& q) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        total += p(i) * (std::log(p(i) + kLogFloor) - std::log(q(i) + kLogFloor));
    }
    return total;
}

double symmetric_sum(double a, double b) { return std::min(a, b) + std::max(a, b); }

void check_skl_inputs(const Matrix& f_out, const Matrix& f_ref) {
    require(f_out.rows() >= 1 && f_ref.rows() >= 1, "skl_reward: empty feature matrix");
    require(f_out.cols() == f_ref.cols() && f_out.cols() >= 1, "skl_reward: feature widths ", f_out.cols(),
            " and ", f_ref.cols(), " differ");
    require_finite(f_out, "skl_reward: F_out");
    require_finite(f_ref, "skl_reward: F_ref");
}

}  // namespace

void KernelConfig::validate() const {
    require(degree >= 1, "kernel degree must be >= 1");
    require(dim_scale >= 1, "kernel dim_scale must be >= 1");
    require(std::isfinite(c), "kernel coefficient must be finite");
}

Matrix kernel_matrix(const Matrix& x, const Matrix& y, const KernelConfig& k) {
    k.validate();
    require(x.cols() == y.cols(), "kernel_matrix: feature widths differ");
    return gram(x, y, k).array().pow(k.degree).matrix();
}

double mmd_reward(const Matrix& f_out, const Matrix& f_ref, const KernelConfig& k) {
    check_mmd_inputs(f_out, f_ref, k);
    const double m = static_cast<double>(f_out.rows());
    const double n = static_cast<double>(f_ref.rows());
    const double xx = off_diagonal_sum(kernel_matrix(f_out, f_out, k));
    const double xy = kernel_matrix(f_out, f_ref, k).sum();
    const double yy = off_diagonal_sum(kernel_matrix(f_ref, f_ref, k));
    return -xx / (m * (m - 1.0)) + 2.0 * xy / (m * n) - yy / (n * (n - 1.0));
}

ad::Var mmd_reward(ad::Var f_out, const Matrix& f_ref, const KernelConfig& k) {
    Matrix value(1, 1);
    value(0, 0) = mmd_reward(f_out.value(), f_ref, k);
    return f_out.tape()->record(std::move(value), {f_out}, [f_out, f_ref, k](ad::Tape& t, const Matrix& g) {
        const Matrix& x = f_out.value();
        const double m = static_cast<double>(x.rows());
        const double n = static_cast<double>(f_ref.rows());
        // d/dx_i k(x_i, y) = degree * (<x_i, y>/d + c)^(degree-1) * y / d
        Matrix dxx = (k.degree * gram(x, x, k).array().pow(k.degree - 1)).matrix();
        dxx.diagonal().setZero();
        const Matrix dxy = (k.degree * gram(x, f_ref, k).array().pow(k.degree - 1)).matrix();
        const Matrix grad = (-2.0 / (m * (m - 1.0)) * (dxx * x) + 2.0 / (m * n) * (dxy * f_ref)) /
                            static_cast<double>(k.dim_scale);
        t.accumulate(f_out, g(0, 0) * grad);
    });
}

RowVector mean_softmax(const Matrix& f) {
    RowVector mean = f.colwise().mean();
    RowVector e = (mean.array() - mean.maxCoeff()).exp().matrix();
    return e / e.sum();
}

double skl_reward(const Matrix& f_out, const Matrix& f_ref) {
    check_skl_inputs(f_out, f_ref);
    const RowVector p = mean_softmax(f_out);
    const RowVector q = mean_softmax(f_ref);
    return -0.5 * symmetric_sum(kl(p, q), kl(q, p));
}

ad::Var skl_reward(ad::Var f_out, const Matrix& f_ref) {
    Matrix value(1, 1);
    value(0, 0) = skl_reward(f_out.value(), f_ref);
    return f_out.tape()->record(std::move(value), {f_out}, [f_out, f_ref](ad::Tape& t, const Matrix& g) {
        const Matrix& x = f_out.value();
        const RowVector p = mean_softmax(x);
        const RowVector q = mean_softmax(f_ref);
        // d/dp [KL(p||q) + KL(q||p)], then back through softmax and the row mean.
        RowVector dp(p.size());
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            dp(i) = std::log(p(i) + kLogFloor) - std::log(q(i) + kLogFloor) + (p(i) - q(i)) / (p(i) + kLogFloor);
        }
        const RowVector dmean = p.cwiseProduct((dp.array() - dp.dot(p)).matrix());
        const RowVector drow = -0.5 * dmean / static_cast<double>(x.rows());
        t.accumulate(f_out, g(0, 0) * drow.replicate(x.rows(), 1));
    });
}

ad::Var alignment_loss(ad::Var f_out, const Matrix& f_ref, const RewardKind& kind) {
    ad::Var reward = std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, MmdKind>) {
                return mmd_reward(f_out, f_ref, k.kernel);
            } else {
                return skl_reward(f_out, f_ref);
            }
        },
        kind);
    return ad::scale(reward, -1.0);
}

double alignment_loss(const Matrix& f_out, const Matrix& f_ref, const RewardKind& kind) {
    return -std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, MmdKind>) {
                return mmd_reward(f_out, f_ref, k.kernel);
            } else {
                return skl_reward(f_out, f_ref);
            }
        },
        kind);
}

}  // namespace distflow
