// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/morphology.hpp"

#include <algorithm>

namespace distflow {

namespace {

void check_mask(const Matrix& mask, int se_side, const char* op) {
    require(se_side >= 1 && se_side % 2 == 1, op, ": structuring element side must be odd, got ", se_side);
    require(is_binary(mask), op, ": mask is not binary");
}

// Min or max over the clipped square window around every pixel.
template <typename Reduce>
Matrix window_reduce(const Matrix& mask, int se_side, double init, Reduce reduce) {
    const Eigen::Index radius = se_side / 2;
    Matrix out(mask.rows(), mask.cols());
    for (Eigen::Index r = 0; r < mask.rows(); ++r) {
        for (Eigen::Index c = 0; c < mask.cols(); ++c) {
            double acc = init;
            for (Eigen::Index y = std::max<Eigen::Index>(0, r - radius);
                 y <= std::min<Eigen::Index>(mask.rows() - 1, r + radius); ++y) {
                for (Eigen::Index x = std::max<Eigen::Index>(0, c - radius);
                     x <= std::min<Eigen::Index>(mask.cols() - 1, c + radius); ++x) {
                    acc = reduce(acc, mask(y, x));
                }
            }
            out(r, c) = acc;
        }
    }
    return out;
}

}  // namespace

bool is_binary(const Matrix& mask) {
    return (mask.array() == 0.0 || mask.array() == 1.0).all();
}

Vector gaussian_kernel(double sigma, int ksize) {
    require(ksize >= 1 && ksize % 2 == 1, "gaussian kernel size must be odd, got ", ksize);
    require(sigma > 0.0, "gaussian sigma must be positive, got ", sigma);
    const int radius = ksize / 2;
    Vector k(ksize);
    for (int i = 0; i < ksize; ++i) {
        const double x = i - radius;
        k(i) = std::exp(-x * x / (2.0 * sigma * sigma));
    }
    return k / k.sum();
}

Matrix gaussian_blur(const Matrix& img, double sigma, int ksize) {
    const Vector k = gaussian_kernel(sigma, ksize);
    require_finite(img, "gaussian_blur");
    const Eigen::Index radius = ksize / 2;
    const Eigen::Index rows = img.rows();
    const Eigen::Index cols = img.cols();
    auto clamp_index = [](Eigen::Index i, Eigen::Index n) { return std::clamp<Eigen::Index>(i, 0, n - 1); };

    Matrix horizontal(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (Eigen::Index j = -radius; j <= radius; ++j) {
                acc += k(j + radius) * img(r, clamp_index(c + j, cols));
            }
            horizontal(r, c) = acc;
        }
    }
    Matrix out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (Eigen::Index j = -radius; j <= radius; ++j) {
                acc += k(j + radius) * horizontal(clamp_index(r + j, rows), c);
            }
            out(r, c) = acc;
        }
    }
    return out;
}

Matrix erode(const Matrix& mask, int se_side) {
    check_mask(mask, se_side, "erode");
    return window_reduce(mask, se_side, 1.0, [](double a, double b) { return std::min(a, b); });
}

Matrix dilate(const Matrix& mask, int se_side) {
    check_mask(mask, se_side, "dilate");
    return window_reduce(mask, se_side, 0.0, [](double a, double b) { return std::max(a, b); });
}

Matrix morph_open(const Matrix& mask, int se_side) { return dilate(erode(mask, se_side), se_side); }

Matrix morph_close(const Matrix& mask, int se_side) { return erode(dilate(mask, se_side), se_side); }

}  // namespace distflow
