// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

// Mask post-processing on H x W images: thresholding, Gaussian blur and
// binary morphology with a flat square structuring element.
//
// Borders use edge replication. For a square window this is the same as
// ignoring out-of-range pixels, which keeps erosion and dilation adjoint so
// that opening is anti-extensive and closing is extensive everywhere.

#pragma once

#include "distflow/common.hpp"

namespace distflow {

/// 1 where value >= thr, else 0.
template <typename Derived>
Matrix threshold_classes(const Eigen::MatrixBase<Derived>& img, double thr) {
    require_finite(img, "threshold_classes");
    return (img.array() >= thr).template cast<double>().matrix();
}

bool is_binary(const Matrix& mask);

/// Sum-normalized, discretely sampled 1-D Gaussian of odd length.
Vector gaussian_kernel(double sigma, int ksize);

/// Separable Gaussian blur with edge replication.
Matrix gaussian_blur(const Matrix& img, double sigma, int ksize);

Matrix erode(const Matrix& mask, int se_side);
Matrix dilate(const Matrix& mask, int se_side);
/// Erode then dilate; removes foreground specks smaller than the element.
Matrix morph_open(const Matrix& mask, int se_side);
/// Dilate then erode; fills background holes smaller than the element.
Matrix morph_close(const Matrix& mask, int se_side);

}  // namespace distflow
