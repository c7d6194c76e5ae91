// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/datagen.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>

#include "distflow/pgm.hpp"

namespace distflow {

namespace fs = std::filesystem;

void DomainSpec::validate() const {
    require(background_level >= 0.0 && background_level <= 1.0, "background_level outside [0, 1]");
    require(foreground_level >= 0.0 && foreground_level <= 1.0, "foreground_level outside [0, 1]");
    require(noise_std >= 0.0, "noise_std must be non-negative");
    require(texture_period >= 0, "texture_period must be non-negative");
}

DomainSpec DomainSpec::source() { return {"source", 0.2, 0.8, 0.05, 0}; }
DomainSpec DomainSpec::target() { return {"target", 0.45, 0.9, 0.03, 4}; }

Corpus gen_dataset(const DomainSpec& spec, int n, int size, std::uint64_t seed) {
    spec.validate();
    require(n >= 1, "gen_dataset: n must be >= 1");
    require(size >= 8, "gen_dataset: size must be >= 8");
    const int pixels = size * size;
    Corpus corpus{size, Matrix(n, pixels), Matrix(n, pixels)};
    Rng rng(seed);
    std::uniform_real_distribution<double> center(0.3 * size, 0.7 * size);
    std::uniform_real_distribution<double> radius(0.15 * size, 0.35 * size);
    std::normal_distribution<double> noise(0.0, 1.0);

    for (int i = 0; i < n; ++i) {
        const double cy = center(rng);
        const double cx = center(rng);
        const double ry = radius(rng);
        const double rx = radius(rng);
        for (int r = 0; r < size; ++r) {
            for (int c = 0; c < size; ++c) {
                const double dy = (r + 0.5 - cy) / ry;
                const double dx = (c + 0.5 - cx) / rx;
                const bool inside = dx * dx + dy * dy <= 1.0;
                double value = inside ? spec.foreground_level : spec.background_level;
                if (spec.texture_period > 0) {
                    value += kTextureAmplitude * std::sin(2.0 * std::numbers::pi * c / spec.texture_period);
                }
                if (spec.noise_std > 0.0) {
                    value += spec.noise_std * noise(rng);
                }
                corpus.images(i, r * size + c) = std::clamp(value, 0.0, 1.0);
                corpus.masks(i, r * size + c) = inside ? 1.0 : 0.0;
            }
        }
    }
    return corpus;
}

std::string indexed_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04zu.pgm", i);
    return buf;
}

void write_image_dir(const fs::path& dir, const Matrix& rows, int size) {
    fs::create_directories(dir);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        write_pgm(dir / indexed_name(static_cast<std::size_t>(i)), unflatten(rows.row(i), size, size));
    }
}

Matrix read_image_dir(const fs::path& dir, int* size) {
    const auto files = list_pgm(dir);
    if (files.empty()) {
        throw std::runtime_error("no .pgm files in " + dir.string());
    }
    Matrix out;
    Eigen::Index side = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        Matrix img = read_pgm(files[i]);
        if (i == 0) {
            if (img.rows() != img.cols()) {
                throw std::runtime_error(files[i].string() + ": images must be square");
            }
            side = img.rows();
            out.resize(static_cast<Eigen::Index>(files.size()), side * side);
        } else if (img.rows() != side || img.cols() != side) {
            throw std::runtime_error(files[i].string() + ": size differs from " + files[0].string());
        }
        out.row(static_cast<Eigen::Index>(i)) = flatten(img);
    }
    if (size != nullptr) {
        *size = static_cast<int>(side);
    }
    return out;
}

void write_corpus(const fs::path& root, const Corpus& corpus) {
    write_image_dir(root / "images", corpus.images, corpus.size);
    write_image_dir(root / "masks", corpus.masks, corpus.size);
}

Corpus read_corpus(const fs::path& root, bool require_masks) {
    Corpus corpus;
    corpus.images = read_image_dir(root / "images", &corpus.size);
    if (fs::is_directory(root / "masks")) {
        int mask_size = 0;
        corpus.masks = read_image_dir(root / "masks", &mask_size);
        if (mask_size != corpus.size || corpus.masks.rows() != corpus.images.rows()) {
            throw std::runtime_error(root.string() + ": images and masks are not paired one-to-one");
        }
    } else if (require_masks) {
        throw std::runtime_error("missing masks directory: " + (root / "masks").string());
    }
    return corpus;
}

}  // namespace distflow
