// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/masksynth.hpp"

#include "distflow/morphology.hpp"

namespace distflow {

void MaskPipelineConfig::validate() const {
    require(threshold > 0.0 && threshold < 1.0, "mask threshold must lie in (0, 1)");
    require(blur_sigma > 0.0, "blur_sigma must be positive");
    require(blur_kernel >= 1 && blur_kernel % 2 == 1, "blur_kernel must be odd");
    require(structuring_element >= 1 && structuring_element % 2 == 1, "structuring_element must be odd");
    require(k >= 1, "candidate count K must be >= 1");
}

Matrix postprocess_mask(const Matrix& raw, const MaskPipelineConfig& cfg) {
    cfg.validate();
    Matrix m = threshold_classes(gaussian_blur(raw, cfg.blur_sigma, cfg.blur_kernel), cfg.threshold);
    m = morph_open(m, cfg.structuring_element);
    return morph_close(m, cfg.structuring_element);
}

std::pair<std::size_t, Matrix> select_best_candidate(const Matrix& real_mask, const std::vector<Matrix>& candidates,
                                                     const FeatureExtractor& extractor) {
    require(!candidates.empty(), "select_best_candidate: no candidates");
    Matrix batch(static_cast<Eigen::Index>(candidates.size()) + 1, real_mask.size());
    batch.row(0) = flatten(real_mask);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        require(candidates[i].rows() == real_mask.rows() && candidates[i].cols() == real_mask.cols(),
                "select_best_candidate: candidate ", i, " has a different shape");
        batch.row(static_cast<Eigen::Index>(i) + 1) = flatten(candidates[i]);
    }
    const Matrix features = extractor.extract(batch);

    std::size_t best = 0;
    double best_sim = -2.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double sim = cosine_similarity(features.row(0), features.row(static_cast<Eigen::Index>(i) + 1));
        if (sim > best_sim) {
            best_sim = sim;
            best = i;
        }
    }
    return {best, candidates[best]};
}

std::vector<Matrix> synthesize_masks(const ControlledVectorFieldNet& mask_model, const Matrix& real_masks,
                                     const MaskPipelineConfig& cfg, const FeatureExtractor& extractor,
                                     std::uint64_t seed, const SamplerConfig& sampler) {
    cfg.validate();
    const int side = mask_model.arch().image_size;
    require(real_masks.cols() == side * side, "synthesize_masks: masks have ", real_masks.cols(),
            " pixels, model expects ", side * side);
    const Matrix null_cond = Matrix::Zero(cfg.k, real_masks.cols());

    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(real_masks.rows()));
    for (Eigen::Index i = 0; i < real_masks.rows(); ++i) {
        Rng rng = derive_rng(seed, static_cast<std::uint64_t>(i));
        const Matrix x0 = standard_normal(rng, cfg.k, real_masks.cols());
        const Matrix raw = sample(mask_model, x0, null_cond, sampler);
        std::vector<Matrix> candidates;
        for (int j = 0; j < cfg.k; ++j) {
            candidates.push_back(postprocess_mask(unflatten(raw.row(j), side, side), cfg));
        }
        if (cfg.k == 1) {
            out.push_back(std::move(candidates.front()));
        } else {
            out.push_back(select_best_candidate(unflatten(real_masks.row(i), side, side), candidates, extractor).second);
        }
    }
    return out;
}

}  // namespace distflow
