// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

// Two-stage training of a controlled flow-matching network.
//
// Stage 1 minimizes the denoising loss L_D. Stage 2 minimizes
// L_D + w_align * L_A, where L_A compares features of one-jump predictions
// (frozen Euler rollout to s, then one tracked step to t = 1) with cached
// features of a few reference images.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "distflow/checkpoint.hpp"
#include "distflow/datagen.hpp"
#include "distflow/features.hpp"
#include "distflow/flow.hpp"
#include "distflow/rewards.hpp"

namespace distflow {

struct TrainConfig {
    int pretrain_iters = 2000;
    int stage1_iters = 2000;
    int stage2_iters = 300;
    double w_align = 1.0;
    int t_s_index = 18;
    double d_t = 1.0 / 20.0;
    double cond_dropout_prob = 0.5;
    OptimizerConfig optimizer;
    RewardKind reward = MmdKind{};
    std::uint64_t seed = 0;
    int log_every = 10;
    NetArch arch;

    void validate() const;
    int grid_cells() const { return static_cast<int>(std::round(1.0 / d_t)); }
};

/// Images, masks and per-sample unconditional flags, aligned row by row.
struct Batch {
    Matrix images;
    Matrix masks;
    Flags uncond;

    Eigen::Index size() const { return images.rows(); }
};

/// Uniform draw with replacement; each flag is set with probability `dropout`.
Batch draw_batch(Rng& rng, const Corpus& corpus, int batch_size, double dropout);

/// Noise and per-sample times for one denoising-loss evaluation.
struct DenoiseDraws {
    Matrix eps;
    Vector t;
};
DenoiseDraws draw_denoise(Rng& rng, Eigen::Index batch, Eigen::Index pixels);

/// mean over batch and pixels of (v(x_t, t, mask) - (x_1 - eps))^2 with x_t on the straight path.
ad::Var denoising_loss(ad::Tape& tape, const ControlledVectorFieldNet& net, const Batch& batch,
                       const DenoiseDraws& draws, ControlledVectorFieldNet::View view = ControlledVectorFieldNet::View::live);

/// Grid start time j * d_t with j uniform on {t_s_index, ..., cells - 1}.
TimeValue sample_start_time(Rng& rng, int t_s_index, double d_t = 1.0 / 20.0);

struct AlignmentTerm {
    ad::Var loss;
    Matrix generated;  ///< one-jump predictions, one image per row
};

/// L_A for one batch of masks: frozen rollout of x0 to s, one tracked jump,
/// features of the result against the cached reference features.
AlignmentTerm alignment_term(ad::Tape& tape, const ControlledVectorFieldNet& net, const Matrix& masks,
                             const Flags& uncond, const Matrix& ref_features, TimeValue s, const Matrix& x0,
                             const FeatureExtractor& extractor, const RewardKind& kind, double d_t);

struct LossRecord {
    std::int64_t iteration = 0;
    int stage = 1;
    double loss_d = 0.0;
    std::optional<double> loss_a;
    double total = 0.0;
};

struct TrainState {
    ControlledVectorFieldNet net;
    AdamW optimizer;
    int stage = 1;
    std::int64_t iteration = 0;
    Rng rng;
};

/// One optimizer step on the trainable parameters. Stage 2 requires reference
/// features. Draw order: denoising noise and times, then s, then x0.
LossRecord train_step(TrainState& state, const Batch& batch, const Matrix* ref_features, const TrainConfig& cfg,
                      const FeatureExtractor& extractor);

/// Extractor shared by the rewards, evaluation and mask filtering.
FeatureExtractor default_extractor(int image_size);

/// Unconditional training of a fresh base trunk on `images`; returned frozen.
ControlledVectorFieldNet pretrain_base(const Matrix& images, const TrainConfig& cfg);

/// Attaches a control branch to a frozen base and runs stage 1.
Snapshot train_stage1(const ControlledVectorFieldNet& base_net, const Corpus& data, const TrainConfig& cfg,
                      std::vector<LossRecord>* log = nullptr);

/// Continues from a stage-1 snapshot with the alignment term added.
Snapshot train_stage2(const Snapshot& stage1, const Corpus& data, const Matrix& ref_images, const TrainConfig& cfg,
                      std::vector<LossRecord>* log = nullptr);

enum class StageSelection { stage1, stage2, both };

struct RunPaths {
    std::filesystem::path dataset_dir;
    std::filesystem::path ref_dir;    ///< needed for stage 2
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> base_ckpt;  ///< skips pretraining (stage 1) or supplies stage 1 (stage 2)
};

/// Pretraining (unless a base checkpoint is given), stage 1 and/or stage 2.
/// Writes stage1.ckpt, stage2.ckpt and losses.csv into out_dir.
void run_training(const TrainConfig& cfg, const RunPaths& paths, StageSelection stages);

void write_losses_csv(const std::filesystem::path& path, const std::vector<LossRecord>& rows);

/// Shortest round-trip decimal representation used in all CSV outputs.
std::string format_double(double v);

}  // namespace distflow
