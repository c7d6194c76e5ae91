// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "distflow/rewards.hpp"

namespace distflow {

/// Kernel (KID-style) distance: the unbiased MMD^2 estimate, i.e. -mmd_reward.
double eval_mmd(const Matrix& gen_features, const Matrix& ref_features, const KernelConfig& kernel);

/// Frechet distance between Gaussians fitted to two feature sets:
///   |mu1 - mu2|^2 + Tr(S1 + S2 - 2 (S1 S2)^(1/2)),
/// covariances use the n-1 normalization plus 1e-6 I.
double mini_frechet(const Matrix& a, const Matrix& b);

/// Principal square root of a symmetric positive semi-definite matrix.
Matrix sqrtm_psd(const Matrix& m);

/// 10 log10(peak^2 / MSE) in dB; +infinity when the inputs are identical.
double psnr(const Matrix& a, const Matrix& b, double peak = 1.0);

/// Projection onto the top two principal axes of the centered rows, each axis
/// signed so its largest-magnitude loading is positive. Needs rank >= 2.
Matrix pca_embed_2d(const Matrix& features);

/// IoU between the thresholded image and a binary mask; 1 when both are empty.
double mask_agreement_iou(const Matrix& generated, const Matrix& cond_mask, double thr);

}  // namespace distflow
