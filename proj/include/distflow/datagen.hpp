// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "distflow/common.hpp"

namespace distflow {

/// Imaging characteristics of one synthetic domain.
struct DomainSpec {
    std::string name;
    double background_level = 0.2;
    double foreground_level = 0.8;
    double noise_std = 0.05;
    int texture_period = 0;  ///< 0 disables the sinusoidal texture

    void validate() const;

    static DomainSpec source();
    static DomainSpec target();
};

/// Amplitude of the column-wise sinusoidal texture.
inline constexpr double kTextureAmplitude = 0.1;

/// Paired images and binary masks, one flattened sample per row.
struct Corpus {
    int size = 0;  ///< side length of the square images
    Matrix images;
    Matrix masks;

    Eigen::Index count() const { return images.rows(); }
    Matrix image(Eigen::Index i) const { return unflatten(images.row(i), size, size); }
    Matrix mask(Eigen::Index i) const { return unflatten(masks.row(i), size, size); }
};

/// n samples of random ellipses: background outside, foreground inside, plus
/// optional texture and Gaussian noise, clipped to [0, 1].
Corpus gen_dataset(const DomainSpec& spec, int n, int size, std::uint64_t seed);

/// Writes <root>/images/NNNN.pgm and <root>/masks/NNNN.pgm.
void write_corpus(const std::filesystem::path& root, const Corpus& corpus);
/// Reads the layout above; masks are optional (left empty when absent).
Corpus read_corpus(const std::filesystem::path& root, bool require_masks = true);

/// Row-stacked images from every *.pgm file in `dir`.
Matrix read_image_dir(const std::filesystem::path& dir, int* size = nullptr);
void write_image_dir(const std::filesystem::path& dir, const Matrix& rows, int size);

std::string indexed_name(std::size_t i);

}  // namespace distflow
