// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "distflow/autodiff.hpp"

namespace distflow {

/// Fixed, seeded embedding network used by the rewards and for mask filtering:
/// conv3x3/2 + SiLU -> conv3x3/2 + SiLU -> global average pool -> linear.
/// Pixels enter as 2p - 1. Conv weights are drawn once from N(0, 2/fan_in),
/// biases and the projection from N(0, 1/fan_in); nothing is trained.
class FeatureExtractor {
public:
    struct Shape {
        int image_size = 16;
        int channels1 = 8;
        int channels2 = 16;
        int dim = 64;
        friend bool operator==(const Shape&, const Shape&) = default;
    };

    FeatureExtractor() : FeatureExtractor(Shape{}, 0) {}
    FeatureExtractor(const Shape& shape, std::uint64_t seed);

    /// images: B x image_size^2 (row-major pixels). Returns B x dim features.
    /// Gradients flow back to `images` when it is tracked.
    ad::Var extract(ad::Tape& tape, ad::Var images) const;
    Matrix extract(const Matrix& images) const;

    int dim() const { return shape_.dim; }
    const Shape& shape() const { return shape_; }
    std::uint64_t seed() const { return seed_; }

private:
    Shape shape_;
    std::uint64_t seed_ = 0;
    int size1_ = 0;  // spatial side after the first conv
    int size2_ = 0;  // spatial side after the second conv
    Matrix conv1_;   // 9 x channels1
    Matrix bias1_;
    Matrix conv2_;   // 9*channels1 x channels2
    Matrix bias2_;
    Matrix proj_;    // channels2 x dim
    Matrix bias_proj_;
};

}  // namespace distflow
