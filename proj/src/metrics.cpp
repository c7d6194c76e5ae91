// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/metrics.hpp"

#include <limits>

#include "distflow/morphology.hpp"

namespace distflow {

namespace {

constexpr double kCovarianceRidge = 1e-6;
constexpr double kRankTolerance = 1e-10;

Matrix covariance(const Matrix& x) {
    const Matrix centered = x.rowwise() - x.colwise().mean();
    Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
    cov.diagonal().array() += kCovarianceRidge;
    return cov;
}

}  // namespace

double eval_mmd(const Matrix& gen_features, const Matrix& ref_features, const KernelConfig& kernel) {
    return -mmd_reward(gen_features, ref_features, kernel);
}

Matrix sqrtm_psd(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("sqrtm_psd: eigendecomposition did not converge");
    }
    const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

double mini_frechet(const Matrix& a, const Matrix& b) {
    require(a.rows() >= 2 && b.rows() >= 2, "mini_frechet needs at least 2 rows per set");
    require(a.cols() == b.cols(), "mini_frechet: feature widths differ");
    require_finite(a, "mini_frechet");
    require_finite(b, "mini_frechet");
    const RowVector mean_diff = a.colwise().mean() - b.colwise().mean();
    const Matrix cov_a = covariance(a);
    const Matrix cov_b = covariance(b);

    // Tr((S1 S2)^(1/2)) = Tr((S1^(1/2) S2 S1^(1/2))^(1/2)), the latter symmetric PSD.
    const Matrix root_a = sqrtm_psd(cov_a);
    const Matrix inner = root_a * cov_b * root_a;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("mini_frechet: eigendecomposition did not converge");
    }
    const double trace_root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return mean_diff.squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * trace_root;
}

double psnr(const Matrix& a, const Matrix& b, double peak) {
    require_same_shape(a, b, "psnr");
    require(a.size() > 0, "psnr: empty images");
    const double mse = (a - b).squaredNorm() / static_cast<double>(a.size());
    if (mse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(peak * peak / mse);
}

Matrix pca_embed_2d(const Matrix& features) {
    require(features.rows() >= 3, "pca_embed_2d needs at least 3 rows, got ", features.rows());
    require_finite(features, "pca_embed_2d");
    const Matrix centered = features.rowwise() - features.colwise().mean();
    const Matrix scatter = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(scatter);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("pca_embed_2d: eigendecomposition did not converge");
    }
    const Eigen::Index d = scatter.rows();
    require(d >= 2, "pca_embed_2d needs at least 2 feature columns");
    const Vector& values = eig.eigenvalues();  // ascending
    const double top = values(d - 1);
    require(top > 0.0 && values(d - 2) > kRankTolerance * top, "pca_embed_2d: centered data has rank < 2");

    Matrix axes(d, 2);
    for (int k = 0; k < 2; ++k) {
        Vector axis = eig.eigenvectors().col(d - 1 - k);
        Eigen::Index arg = 0;
        axis.cwiseAbs().maxCoeff(&arg);
        if (axis(arg) < 0.0) {
            axis = -axis;
        }
        axes.col(k) = axis;
    }
    return centered * axes;
}

double mask_agreement_iou(const Matrix& generated, const Matrix& cond_mask, double thr) {
    require_same_shape(generated, cond_mask, "mask_agreement_iou");
    const Matrix pred = threshold_classes(generated, thr);
    const auto a = pred.array() > 0.5;
    const auto b = cond_mask.array() > 0.5;
    const double inter = (a && b).count();
    const double uni = (a || b).count();
    return uni == 0.0 ? 1.0 : inter / uni;
}

}  // namespace distflow
