// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/features.hpp"

#include "distflow/params.hpp"

namespace distflow {

namespace {

constexpr double kGain = 1.4142135623730951;

int conv_out(int side) { return (side + 2 - 3) / 2 + 1; }

// im2col for a 3x3, stride 2, zero-padded convolution. The source holds one
// row per (sample, y, x) position and one column per channel.
std::vector<int> patch_index(int batch, int side_in, int side_out, int channels) {
    const int rows_in = batch * side_in * side_in;
    const int rows_out = batch * side_out * side_out;
    std::vector<int> index(static_cast<std::size_t>(rows_out) * 9 * channels, -1);
    for (int b = 0; b < batch; ++b) {
        for (int oy = 0; oy < side_out; ++oy) {
            for (int ox = 0; ox < side_out; ++ox) {
                const int row = b * side_out * side_out + oy * side_out + ox;
                for (int ky = 0; ky < 3; ++ky) {
                    for (int kx = 0; kx < 3; ++kx) {
                        const int iy = 2 * oy - 1 + ky;
                        const int ix = 2 * ox - 1 + kx;
                        if (iy < 0 || ix < 0 || iy >= side_in || ix >= side_in) {
                            continue;
                        }
                        const int src_row = b * side_in * side_in + iy * side_in + ix;
                        for (int ch = 0; ch < channels; ++ch) {
                            const int col = (ky * 3 + kx) * channels + ch;
                            index[static_cast<std::size_t>(col) * rows_out + row] = ch * rows_in + src_row;
                        }
                    }
                }
            }
        }
    }
    return index;
}

}  // namespace

FeatureExtractor::FeatureExtractor(const Shape& shape, std::uint64_t seed) : shape_(shape), seed_(seed) {
    require(shape.image_size >= 2 && shape.channels1 >= 1 && shape.channels2 >= 1 && shape.dim >= 1,
            "invalid feature extractor shape");
    size1_ = conv_out(shape.image_size);
    size2_ = conv_out(size1_);
    Rng rng = derive_rng(seed, 0xFEA7);
    conv1_ = kGain * fan_in_normal(rng, 9, shape.channels1, 9);
    bias1_ = fan_in_normal(rng, 1, shape.channels1, 9);
    conv2_ = kGain * fan_in_normal(rng, 9 * shape.channels1, shape.channels2, 9 * shape.channels1);
    bias2_ = fan_in_normal(rng, 1, shape.channels2, 9 * shape.channels1);
    proj_ = fan_in_normal(rng, shape.channels2, shape.dim, shape.channels2);
    bias_proj_ = fan_in_normal(rng, 1, shape.dim, shape.channels2);
}

ad::Var FeatureExtractor::extract(ad::Tape& tape, ad::Var images) const {
    const int batch = static_cast<int>(images.rows());
    const int side = shape_.image_size;
    require(batch >= 1, "extract_features: empty batch");
    require(images.cols() == side * side, "extract_features: images have ", images.cols(),
            " pixels, extractor expects ", side * side);

    // Pixels in [0, 1] enter as 2p - 1.
    ad::Var centered = ad::add_row(ad::scale(images, 2.0), tape.constant(Matrix::Constant(1, images.cols(), -1.0)));
    ad::Var patches1 = ad::gather(centered, static_cast<Eigen::Index>(batch) * size1_ * size1_, 9,
                                  [&] {
                                      // Images arrive as B x (y*side + x); view them as one
                                      // channel with rows ordered (b, y, x).
                                      std::vector<int> idx = patch_index(batch, side, size1_, 1);
                                      for (int& i : idx) {
                                          if (i >= 0) {
                                              const int b = i / (side * side);
                                              const int pix = i % (side * side);
                                              i = pix * batch + b;
                                          }
                                      }
                                      return idx;
                                  }());
    ad::Var a1 = ad::silu(ad::add_row(ad::matmul(patches1, tape.constant(conv1_)), tape.constant(bias1_)));

    ad::Var patches2 = ad::gather(a1, static_cast<Eigen::Index>(batch) * size2_ * size2_, 9 * shape_.channels1,
                                  patch_index(batch, size1_, size2_, shape_.channels1));
    ad::Var a2 = ad::silu(ad::add_row(ad::matmul(patches2, tape.constant(conv2_)), tape.constant(bias2_)));

    const int positions = size2_ * size2_;
    Matrix pool = Matrix::Zero(batch, static_cast<Eigen::Index>(batch) * positions);
    for (int b = 0; b < batch; ++b) {
        pool.block(b, static_cast<Eigen::Index>(b) * positions, 1, positions).setConstant(1.0 / positions);
    }
    ad::Var pooled = ad::matmul(tape.constant(std::move(pool)), a2);
    return ad::add_row(ad::matmul(pooled, tape.constant(proj_)), tape.constant(bias_proj_));
}

Matrix FeatureExtractor::extract(const Matrix& images) const {
    ad::Tape tape;
    return extract(tape, tape.constant(images)).value();
}

}  // namespace distflow
