// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/trainer.hpp"

#include <charconv>
#include <fstream>

namespace distflow {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kExtractorSeed = 0x5EED;

enum Stream : std::uint64_t { kPretrain = 100, kStage1 = 101, kStage2 = 102, kControlInit = 103 };

Matrix references_from(const fs::path& ref_dir) {
    const fs::path images = ref_dir / "images";
    return read_image_dir(fs::is_directory(images) ? images : ref_dir);
}

void check_references(const Matrix& refs, const TrainConfig& cfg) {
    const bool mmd = std::holds_alternative<MmdKind>(cfg.reward);
    require(refs.rows() >= (mmd ? 2 : 1), "stage 2 with the ", mmd ? "MMD" : "SKL", " reward needs at least ",
            mmd ? 2 : 1, " reference images, got ", refs.rows());
    require(refs.cols() == cfg.arch.pixels(), "reference images have ", refs.cols(), " pixels, network expects ",
            cfg.arch.pixels());
}

bool should_log(std::int64_t local_iteration, int log_every) { return local_iteration % log_every == 0; }

}  // namespace

void TrainConfig::validate() const {
    require(pretrain_iters >= 0 && stage1_iters >= 0 && stage2_iters >= 0, "iteration counts must be >= 0");
    require(w_align >= 0.0, "w_align must be >= 0");
    require(d_t > 0.0 && d_t <= 1.0 && std::abs(d_t * std::round(1.0 / d_t) - 1.0) <= 1e-12,
            "d_t must tile [0, 1]");
    require(t_s_index >= 0 && t_s_index < grid_cells(), "t_s_index must lie in [0, ", grid_cells() - 1, "]");
    require(cond_dropout_prob >= 0.0 && cond_dropout_prob <= 1.0, "cond_dropout_prob must lie in [0, 1]");
    require(log_every >= 1, "log_every must be >= 1");
    optimizer.validate();
    arch.validate();
    if (const auto* mmd = std::get_if<MmdKind>(&reward)) {
        mmd->kernel.validate();
    }
}

Batch draw_batch(Rng& rng, const Corpus& corpus, int batch_size, double dropout) {
    require(corpus.count() >= 1, "draw_batch: empty corpus");
    require(batch_size >= 1, "draw_batch: batch_size must be >= 1");
    std::uniform_int_distribution<Eigen::Index> pick(0, corpus.count() - 1);
    std::bernoulli_distribution drop(dropout);
    const bool has_masks = corpus.masks.rows() == corpus.count();
    Batch b{Matrix(batch_size, corpus.images.cols()), Matrix::Zero(batch_size, corpus.images.cols()),
            Flags(batch_size)};
    for (int i = 0; i < batch_size; ++i) {
        const Eigen::Index k = pick(rng);
        b.images.row(i) = corpus.images.row(k);
        if (has_masks) {
            b.masks.row(i) = corpus.masks.row(k);
        }
        b.uncond(i) = drop(rng);
    }
    return b;
}

DenoiseDraws draw_denoise(Rng& rng, Eigen::Index batch, Eigen::Index pixels) {
    DenoiseDraws d;
    d.eps = standard_normal(rng, batch, pixels);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    d.t.resize(batch);
    for (Eigen::Index i = 0; i < batch; ++i) {
        d.t(i) = uniform(rng);
    }
    return d;
}

ad::Var denoising_loss(ad::Tape& tape, const ControlledVectorFieldNet& net, const Batch& batch,
                       const DenoiseDraws& draws, ControlledVectorFieldNet::View view) {
    require(batch.size() >= 1, "denoising_loss: empty batch");
    const Matrix x_t = interpolate(batch.images, draws.eps, draws.t);
    ad::Var target = tape.constant(target_vector_field(batch.images, draws.eps));
    ad::Var v = net.forward(tape, x_t, draws.t, batch.masks, batch.uncond, view);
    return ad::mean(ad::square(v - target));
}

TimeValue sample_start_time(Rng& rng, int t_s_index, double d_t) {
    const int cells = static_cast<int>(std::round(1.0 / d_t));
    require(t_s_index >= 0 && t_s_index < cells, "start index ", t_s_index, " outside [0, ", cells - 1, "]");
    std::uniform_int_distribution<int> pick(t_s_index, cells - 1);
    return TimeValue(pick(rng) * d_t);
}

AlignmentTerm alignment_term(ad::Tape& tape, const ControlledVectorFieldNet& net, const Matrix& masks,
                             const Flags& uncond, const Matrix& ref_features, TimeValue s, const Matrix& x0,
                             const FeatureExtractor& extractor, const RewardKind& kind, double d_t) {
    if (std::holds_alternative<MmdKind>(kind)) {
        require(masks.rows() >= 2, "alignment term with the MMD reward needs at least 2 generated images, got ",
                masks.rows());
    }
    const Matrix x_s = frozen_rollout(net.frozen_copy(), x0, masks, uncond, s, d_t);
    ad::Var generated = tunable_jump(tape, net, x_s, s, masks, uncond);
    ad::Var features = extractor.extract(tape, generated);
    return {alignment_loss(features, ref_features, kind), generated.value()};
}

LossRecord train_step(TrainState& state, const Batch& batch, const Matrix* ref_features, const TrainConfig& cfg,
                      const FeatureExtractor& extractor) {
    require(state.stage >= 0 && state.stage <= 2, "unknown training stage ", state.stage);
    ++state.iteration;
    LossRecord rec;
    rec.iteration = state.iteration;
    rec.stage = state.stage;

    const DenoiseDraws draws = draw_denoise(state.rng, batch.size(), batch.images.cols());
    ad::Tape tape;
    ad::Var loss_d = denoising_loss(tape, state.net, batch, draws);
    ad::Var total = loss_d;
    rec.loss_d = loss_d.value()(0, 0);

    if (state.stage == 2) {
        require(ref_features != nullptr, "stage 2 requires reference features");
        const TimeValue s = sample_start_time(state.rng, cfg.t_s_index, cfg.d_t);
        const Matrix x0 = standard_normal(state.rng, batch.size(), batch.images.cols());
        AlignmentTerm term = alignment_term(tape, state.net, batch.masks, batch.uncond, *ref_features, s, x0,
                                            extractor, cfg.reward, cfg.d_t);
        rec.loss_a = term.loss.value()(0, 0);
        total = loss_d + ad::scale(term.loss, cfg.w_align);
    }
    rec.total = total.value()(0, 0);
    if (!std::isfinite(rec.total)) {
        throw std::domain_error(concat("non-finite loss at iteration ", state.iteration, " (stage ", state.stage, ")"));
    }

    const Gradients grads = tape.backward(total);
    ParamSet& trainable = state.stage == 0 ? state.net.base() : state.net.control();
    state.optimizer.step(trainable, grads, cfg.optimizer);
    return rec;
}

FeatureExtractor default_extractor(int image_size) {
    FeatureExtractor::Shape shape;
    shape.image_size = image_size;
    return FeatureExtractor(shape, kExtractorSeed);
}

ControlledVectorFieldNet pretrain_base(const Matrix& images, const TrainConfig& cfg) {
    cfg.validate();
    require(images.cols() == cfg.arch.pixels(), "pretraining images have ", images.cols(), " pixels, network expects ",
            cfg.arch.pixels());
    Corpus data{cfg.arch.image_size, images, Matrix()};
    TrainState state{ControlledVectorFieldNet::make_base(cfg.arch, cfg.seed), AdamW(), 0, 0,
                     derive_rng(cfg.seed, kPretrain)};
    const FeatureExtractor unused = default_extractor(cfg.arch.image_size);
    for (int i = 0; i < cfg.pretrain_iters; ++i) {
        Batch batch = draw_batch(state.rng, data, cfg.optimizer.batch_size, 1.0);
        train_step(state, batch, nullptr, cfg, unused);
    }
    state.net.base().set_frozen(true);
    return state.net;
}

Snapshot train_stage1(const ControlledVectorFieldNet& base_net, const Corpus& data, const TrainConfig& cfg,
                      std::vector<LossRecord>* log) {
    cfg.validate();
    require(!base_net.has_control(), "stage 1 expects a base network without a control branch");
    require(base_net.arch() == cfg.arch, "base network architecture differs from the configuration");
    require(data.masks.rows() == data.count(), "stage 1 needs paired masks");
    TrainState state{base_net, AdamW(), 1, 0, derive_rng(cfg.seed, kStage1)};
    state.net.base().set_frozen(true);
    state.net.attach_control(derive_rng(cfg.seed, kControlInit)());
    const FeatureExtractor extractor = default_extractor(cfg.arch.image_size);
    for (int i = 1; i <= cfg.stage1_iters; ++i) {
        Batch batch = draw_batch(state.rng, data, cfg.optimizer.batch_size, cfg.cond_dropout_prob);
        LossRecord rec = train_step(state, batch, nullptr, cfg, extractor);
        if (log != nullptr && should_log(i, cfg.log_every)) {
            log->push_back(rec);
        }
    }
    return {state.net, state.optimizer, 1, state.iteration};
}

Snapshot train_stage2(const Snapshot& stage1, const Corpus& data, const Matrix& ref_images, const TrainConfig& cfg,
                      std::vector<LossRecord>* log) {
    cfg.validate();
    require(stage1.net.has_control(), "stage 2 needs a network with a control branch (a stage-1 checkpoint)");
    require(stage1.net.arch() == cfg.arch, "checkpoint architecture differs from the configuration");
    require(data.masks.rows() == data.count(), "stage 2 needs paired masks");
    check_references(ref_images, cfg);
    const FeatureExtractor extractor = default_extractor(cfg.arch.image_size);
    const Matrix ref_features = extractor.extract(ref_images);

    TrainState state{stage1.net, stage1.optimizer, 2, stage1.iteration, derive_rng(cfg.seed, kStage2)};
    state.net.base().set_frozen(true);
    for (int i = 1; i <= cfg.stage2_iters; ++i) {
        Batch batch = draw_batch(state.rng, data, cfg.optimizer.batch_size, cfg.cond_dropout_prob);
        LossRecord rec = train_step(state, batch, &ref_features, cfg, extractor);
        if (log != nullptr && should_log(i, cfg.log_every)) {
            log->push_back(rec);
        }
    }
    return {state.net, state.optimizer, 2, state.iteration};
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

void write_losses_csv(const fs::path& path, const std::vector<LossRecord>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << "iter,stage,loss_d,loss_a,loss_total\n";
    for (const LossRecord& r : rows) {
        out << r.iteration << ',' << r.stage << ',' << format_double(r.loss_d) << ','
            << (r.loss_a ? format_double(*r.loss_a) : std::string()) << ',' << format_double(r.total) << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

void run_training(const TrainConfig& cfg, const RunPaths& paths, StageSelection stages) {
    cfg.validate();
    const bool run1 = stages != StageSelection::stage2;
    const bool run2 = stages != StageSelection::stage1;

    const Corpus data = read_corpus(paths.dataset_dir);
    require(data.size == cfg.arch.image_size, "dataset images are ", data.size, "x", data.size,
            ", configuration expects ", cfg.arch.image_size);
    Matrix refs;
    if (run2) {
        require(!paths.ref_dir.empty(), "stage 2 needs a reference directory");
        refs = references_from(paths.ref_dir);
        check_references(refs, cfg);
    }
    fs::create_directories(paths.out_dir);

    std::vector<LossRecord> log;
    std::optional<Snapshot> stage1;
    if (run1) {
        ControlledVectorFieldNet base;
        if (paths.base_ckpt) {
            base = load_snapshot(*paths.base_ckpt).net;
            require(!base.has_control(), paths.base_ckpt->string(), " already has a control branch");
        } else {
            base = pretrain_base(data.images, cfg);
        }
        stage1 = train_stage1(base, data, cfg, &log);
        save_snapshot(paths.out_dir / "stage1.ckpt", *stage1);
    } else {
        const fs::path from = paths.base_ckpt ? *paths.base_ckpt : paths.out_dir / "stage1.ckpt";
        stage1 = load_snapshot(from);
        require(stage1->net.has_control(), from.string(), " is not a stage-1 checkpoint");
    }
    if (run2) {
        const Snapshot stage2 = train_stage2(*stage1, data, refs, cfg, &log);
        save_snapshot(paths.out_dir / "stage2.ckpt", stage2);
    }
    write_losses_csv(paths.out_dir / "losses.csv", log);
}

}  // namespace distflow
