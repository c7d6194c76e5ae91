// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "distflow/features.hpp"
#include "distflow/flow.hpp"

namespace distflow {

struct MaskPipelineConfig {
    double threshold = 0.5;
    double blur_sigma = 1.0;
    int blur_kernel = 5;
    int structuring_element = 3;
    int k = 4;  ///< raw candidates sampled per real mask

    void validate() const;
};

template <typename D1, typename D2>
double cosine_similarity(const Eigen::MatrixBase<D1>& a, const Eigen::MatrixBase<D2>& b) {
    require(a.size() == b.size(), "cosine_similarity: lengths ", a.size(), " and ", b.size(), " differ");
    const double na = a.norm();
    const double nb = b.norm();
    require(na > 0.0 && nb > 0.0, "cosine_similarity: zero-norm vector");
    return a.reshaped().dot(b.reshaped()) / (na * nb);
}

/// blur -> threshold -> open -> close on one raw H x W sample.
Matrix postprocess_mask(const Matrix& raw, const MaskPipelineConfig& cfg);

/// Candidate whose pooled features are most cosine-similar to the real mask;
/// ties go to the lowest index.
std::pair<std::size_t, Matrix> select_best_candidate(const Matrix& real_mask, const std::vector<Matrix>& candidates,
                                                     const FeatureExtractor& extractor);

/// One finalized binary mask per real mask. `real_masks` holds one flattened
/// mask per row; candidates for mask i come from a stream derived from (seed, i).
std::vector<Matrix> synthesize_masks(const ControlledVectorFieldNet& mask_model, const Matrix& real_masks,
                                     const MaskPipelineConfig& cfg, const FeatureExtractor& extractor,
                                     std::uint64_t seed, const SamplerConfig& sampler = {28, 0.0, 1.0 / 20.0});

}  // namespace distflow
