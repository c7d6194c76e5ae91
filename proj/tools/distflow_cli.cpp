// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end for the whole workflow. Every subcommand reads an
// optional JSON config, applies flag overrides on top, echoes the effective
// config as config.resolved.json next to its output and exits nonzero with a
// one-line diagnostic on failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "distflow/config.hpp"
#include "distflow/datagen.hpp"
#include "distflow/masksynth.hpp"
#include "distflow/metrics.hpp"
#include "distflow/pgm.hpp"
#include "distflow/trainer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace distflow;

namespace {

struct Common {
    std::string config;
};

AppConfig base_config(const Common& c) { return c.config.empty() ? AppConfig{} : load_config(c.config); }

void finish_config(AppConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    write_resolved_config(out_dir / "config.resolved.json", cfg);
}

fs::path parent_or_cwd(const fs::path& file) {
    const fs::path parent = file.parent_path();
    return parent.empty() ? fs::path(".") : parent;
}

/// Directory holding images: `<dir>/<sub>` when present, else `dir` itself.
fs::path image_dir(const fs::path& dir, const char* sub) {
    return fs::is_directory(dir / sub) ? dir / sub : dir;
}

// ---- datagen ---------------------------------------------------------------

struct DatagenArgs {
    std::string spec = "source";
    int n = 256;
    int size = 16;
    std::uint64_t seed = 0;
    std::string out;
};

DomainSpec domain_from(const std::string& spec) {
    if (spec == "source") {
        return DomainSpec::source();
    }
    if (spec == "target") {
        return DomainSpec::target();
    }
    std::ifstream in(spec);
    if (!in) {
        throw std::runtime_error("--spec must be source, target or a readable JSON file, got " + spec);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(spec + ": malformed JSON: " + e.what());
    }
    static const std::set<std::string> kKeys = {"name", "background_level", "foreground_level", "noise_std",
                                                "texture_period"};
    if (!j.is_object()) {
        throw std::invalid_argument(spec + ": domain spec must be an object");
    }
    DomainSpec d;
    d.name = fs::path(spec).stem().string();
    for (const auto& [key, value] : j.items()) {
        if (!kKeys.count(key)) {
            throw std::invalid_argument(spec + ": unknown key '" + key + "'");
        }
    }
    try {
        d.name = j.value("name", d.name);
        d.background_level = j.value("background_level", d.background_level);
        d.foreground_level = j.value("foreground_level", d.foreground_level);
        d.noise_std = j.value("noise_std", d.noise_std);
        d.texture_period = j.value("texture_period", d.texture_period);
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument(spec + ": a domain field has the wrong type");
    }
    d.validate();
    return d;
}

void run_datagen(const DatagenArgs& a) {
    write_corpus(a.out, gen_dataset(domain_from(a.spec), a.n, a.size, a.seed));
}

// ---- pretrain-base ---------------------------------------------------------

struct PretrainArgs {
    Common common;
    std::string data;
    std::string out;
    std::string on = "images";
    std::optional<int> iters;
    std::optional<std::uint64_t> seed;
};

void run_pretrain(const PretrainArgs& a) {
    AppConfig cfg = base_config(a.common);
    if (a.iters) cfg.train.pretrain_iters = *a.iters;
    if (a.seed) cfg.train.seed = *a.seed;
    finish_config(cfg, parent_or_cwd(a.out));

    int size = 0;
    const Matrix rows = read_image_dir(fs::path(a.data) / a.on, &size);
    require(size == cfg.train.arch.image_size, a.data, ": images are ", size, "x", size, ", configuration expects ",
            cfg.train.arch.image_size);
    Snapshot snap;
    snap.net = pretrain_base(rows, cfg.train);
    snap.stage = 0;
    snap.iteration = cfg.train.pretrain_iters;
    save_snapshot(a.out, snap);
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
    Common common;
    std::string data;
    std::string refs;
    std::string base;
    std::string stage = "both";
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> w_align;
    std::optional<std::string> reward;
    std::optional<int> pretrain_iters;
    std::optional<int> stage1_iters;
    std::optional<int> stage2_iters;
    std::optional<int> t_s_index;
};

void run_train(const TrainArgs& a) {
    AppConfig cfg = base_config(a.common);
    TrainConfig& t = cfg.train;
    if (a.seed) t.seed = *a.seed;
    if (a.w_align) t.w_align = *a.w_align;
    if (a.reward) {
        if (*a.reward == "skl") {
            t.reward = SklKind{};
        } else if (!std::holds_alternative<MmdKind>(t.reward)) {
            t.reward = MmdKind{};
        }
    }
    if (a.pretrain_iters) t.pretrain_iters = *a.pretrain_iters;
    if (a.stage1_iters) t.stage1_iters = *a.stage1_iters;
    if (a.stage2_iters) t.stage2_iters = *a.stage2_iters;
    if (a.t_s_index) t.t_s_index = *a.t_s_index;
    finish_config(cfg, a.out);

    const StageSelection stages = a.stage == "1"   ? StageSelection::stage1
                                  : a.stage == "2" ? StageSelection::stage2
                                                   : StageSelection::both;
    RunPaths paths{a.data, a.refs, a.out, std::nullopt};
    if (!a.base.empty()) {
        paths.base_ckpt = fs::path(a.base);
    }
    run_training(t, paths, stages);
}

// ---- sample ----------------------------------------------------------------

struct SampleArgs {
    Common common;
    std::string ckpt;
    std::string masks;
    std::optional<int> steps;
    std::optional<double> guidance;
    std::uint64_t seed = 0;
    std::string out;
};

void run_sample(const SampleArgs& a) {
    AppConfig cfg = base_config(a.common);
    if (a.steps) cfg.sampler.steps = *a.steps;
    if (a.guidance) cfg.sampler.guidance_scale = *a.guidance;
    finish_config(cfg, a.out);

    const Snapshot snap = load_snapshot(a.ckpt);
    int size = 0;
    const Matrix masks = read_image_dir(image_dir(a.masks, "masks"), &size);
    require(size == snap.net.arch().image_size, a.masks, ": masks are ", size, "x", size, ", checkpoint expects ",
            snap.net.arch().image_size);
    const Matrix images = sample(snap.net, masks, cfg.sampler, a.seed).cwiseMax(0.0).cwiseMin(1.0);
    write_image_dir(fs::path(a.out) / "images", images, size);
    write_image_dir(fs::path(a.out) / "masks", masks, size);
}

// ---- masksynth -------------------------------------------------------------

struct MasksynthArgs {
    Common common;
    std::string model;
    std::string real_masks;
    std::optional<int> k;
    std::uint64_t seed = 0;
    std::string out;
};

void run_masksynth(const MasksynthArgs& a) {
    AppConfig cfg = base_config(a.common);
    if (a.k) cfg.mask.k = *a.k;
    finish_config(cfg, a.out);

    const Snapshot snap = load_snapshot(a.model);
    int size = 0;
    const Matrix real = read_image_dir(image_dir(a.real_masks, "masks"), &size);
    require(size == snap.net.arch().image_size, a.real_masks, ": masks are ", size, "x", size,
            ", mask model expects ", snap.net.arch().image_size);
    SamplerConfig sampler = cfg.sampler;
    sampler.guidance_scale = 0.0;
    const std::vector<Matrix> made =
        synthesize_masks(snap.net, real, cfg.mask, default_extractor(size), a.seed, sampler);
    Matrix rows(static_cast<Eigen::Index>(made.size()), size * size);
    for (std::size_t i = 0; i < made.size(); ++i) {
        rows.row(static_cast<Eigen::Index>(i)) = flatten(made[i]);
    }
    write_image_dir(fs::path(a.out) / "masks", rows, size);
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
    Common common;
    std::string gen;
    std::string ref;
    std::vector<std::string> metrics = {"mmd", "frechet", "psnr", "iou"};
    double iou_threshold = 0.65;
    std::string out = "metrics.csv";
};

double mean_psnr(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "psnr pairs images by index: ", a.rows(), " generated vs ", b.rows(),
            " reference images");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        sum += psnr(a.row(i), b.row(i));
    }
    return sum / static_cast<double>(a.rows());
}

double mean_iou(const fs::path& gen, const Matrix& images, int size, double thr) {
    int mask_size = 0;
    const Matrix masks = read_image_dir(gen / "masks", &mask_size);
    require(mask_size == size && masks.rows() == images.rows(), gen.string(),
            ": images and masks are not paired one-to-one");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < images.rows(); ++i) {
        sum += mask_agreement_iou(unflatten(images.row(i), size, size), unflatten(masks.row(i), size, size), thr);
    }
    return sum / static_cast<double>(images.rows());
}

void run_eval(const EvalArgs& a) {
    AppConfig cfg = base_config(a.common);
    finish_config(cfg, parent_or_cwd(a.out));
    const auto* mmd = std::get_if<MmdKind>(&cfg.train.reward);
    const KernelConfig kernel = mmd ? mmd->kernel : KernelConfig{};

    int gen_size = 0;
    int ref_size = 0;
    const Matrix gen = read_image_dir(image_dir(a.gen, "images"), &gen_size);
    const Matrix ref = read_image_dir(image_dir(a.ref, "images"), &ref_size);
    require(gen_size == ref_size, "generated images are ", gen_size, "x", gen_size, ", references are ", ref_size,
            "x", ref_size);
    const FeatureExtractor extractor = default_extractor(gen_size);
    std::optional<Matrix> gen_f;
    std::optional<Matrix> ref_f;
    auto features = [&] {
        if (!gen_f) {
            gen_f = extractor.extract(gen);
            ref_f = extractor.extract(ref);
        }
    };

    std::ostringstream csv;
    csv << "metric,value\n";
    for (const std::string& m : a.metrics) {
        double value = 0.0;
        if (m == "mmd") {
            features();
            value = eval_mmd(*gen_f, *ref_f, kernel);
        } else if (m == "frechet") {
            features();
            value = mini_frechet(*gen_f, *ref_f);
        } else if (m == "psnr") {
            value = mean_psnr(gen, ref);
        } else if (m == "iou") {
            value = mean_iou(a.gen, gen, gen_size, a.iou_threshold);
        }
        csv << m << ',' << (std::isinf(value) ? std::string("inf") : format_double(value)) << '\n';
    }
    std::ofstream out(a.out);
    if (!out) {
        throw std::runtime_error("cannot open " + a.out + " for writing");
    }
    out << csv.str();
}

// ---- embed -----------------------------------------------------------------

struct EmbedArgs {
    Common common;
    std::vector<std::string> sets;
    std::string out = "embeddings.csv";
};

void run_embed(const EmbedArgs& a) {
    AppConfig cfg = base_config(a.common);
    finish_config(cfg, parent_or_cwd(a.out));

    std::vector<std::string> labels;
    std::vector<Matrix> blocks;
    int size = 0;
    for (const std::string& entry : a.sets) {
        const auto eq = entry.find('=');
        require(eq != std::string::npos && eq > 0 && eq + 1 < entry.size(), "--sets entry '", entry,
                "' is not NAME=DIR");
        int s = 0;
        blocks.push_back(read_image_dir(image_dir(entry.substr(eq + 1), "images"), &s));
        require(size == 0 || s == size, entry, ": images are ", s, "x", s, ", earlier sets are ", size, "x", size);
        size = s;
        labels.insert(labels.end(), static_cast<std::size_t>(blocks.back().rows()), entry.substr(0, eq));
    }
    Eigen::Index total = 0;
    for (const Matrix& b : blocks) total += b.rows();
    Matrix all(total, static_cast<Eigen::Index>(size) * size);
    Eigen::Index row = 0;
    for (const Matrix& b : blocks) {
        all.middleRows(row, b.rows()) = b;
        row += b.rows();
    }
    const Matrix xy = pca_embed_2d(default_extractor(size).extract(all));

    std::ofstream out(a.out);
    if (!out) {
        throw std::runtime_error("cannot open " + a.out + " for writing");
    }
    out << "set_label,x,y\n";
    for (Eigen::Index i = 0; i < xy.rows(); ++i) {
        out << labels[static_cast<std::size_t>(i)] << ',' << format_double(xy(i, 0)) << ','
            << format_double(xy(i, 1)) << '\n';
    }
}

void add_config(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distflow: two-stage flow matching with distribution alignment"};
    app.require_subcommand(1);

    DatagenArgs dg;
    CLI::App* datagen = app.add_subcommand("datagen", "Generate a synthetic image/mask corpus");
    datagen->add_option("--spec", dg.spec, "source, target or a JSON domain file")->capture_default_str();
    datagen->add_option("--n", dg.n, "number of samples")->capture_default_str();
    datagen->add_option("--size", dg.size, "image side length")->capture_default_str();
    datagen->add_option("--seed", dg.seed)->capture_default_str();
    datagen->add_option("--out", dg.out, "corpus root")->required();

    PretrainArgs pt;
    CLI::App* pretrain = app.add_subcommand("pretrain-base", "Train an unconditional base network");
    add_config(pretrain, pt.common);
    pretrain->add_option("--data", pt.data, "corpus root")->required()->check(CLI::ExistingDirectory);
    pretrain->add_option("--out", pt.out, "checkpoint path")->required();
    pretrain->add_option("--on", pt.on, "train on the corpus images or masks")
        ->check(CLI::IsMember({"images", "masks"}))
        ->capture_default_str();
    pretrain->add_option("--iters", pt.iters, "overrides train.pretrain_iters");
    pretrain->add_option("--seed", pt.seed, "overrides train.seed");

    TrainArgs tr;
    CLI::App* train = app.add_subcommand("train", "Stage-1 and/or stage-2 training");
    add_config(train, tr.common);
    train->add_option("--data", tr.data, "source corpus root")->required()->check(CLI::ExistingDirectory);
    train->add_option("--refs", tr.refs, "reference images for stage 2")->check(CLI::ExistingDirectory);
    train->add_option("--base", tr.base, "base checkpoint (stage 1) or stage-1 checkpoint (stage 2)")
        ->check(CLI::ExistingFile);
    train->add_option("--stage", tr.stage)->check(CLI::IsMember({"1", "2", "both"}))->capture_default_str();
    train->add_option("--out", tr.out, "output directory")->required();
    train->add_option("--seed", tr.seed, "overrides train.seed");
    train->add_option("--w-align", tr.w_align, "overrides train.w_align");
    train->add_option("--reward", tr.reward, "overrides train.reward")->check(CLI::IsMember({"mmd", "skl"}));
    train->add_option("--pretrain-iters", tr.pretrain_iters, "overrides train.pretrain_iters");
    train->add_option("--stage1-iters", tr.stage1_iters, "overrides train.stage1_iters");
    train->add_option("--stage2-iters", tr.stage2_iters, "overrides train.stage2_iters");
    train->add_option("--t-s-index", tr.t_s_index, "overrides train.t_s_index");

    SampleArgs sa;
    CLI::App* samp = app.add_subcommand("sample", "Mask-conditioned sampling with classifier-free guidance");
    add_config(samp, sa.common);
    samp->add_option("--ckpt", sa.ckpt)->required()->check(CLI::ExistingFile);
    samp->add_option("--masks", sa.masks, "mask directory or corpus root")->required()->check(CLI::ExistingDirectory);
    samp->add_option("--steps", sa.steps, "overrides sampler.steps (28)");
    samp->add_option("--guidance", sa.guidance, "overrides sampler.guidance_scale (7.0)");
    samp->add_option("--seed", sa.seed)->capture_default_str();
    samp->add_option("--out", sa.out, "output directory")->required();

    MasksynthArgs ms;
    CLI::App* masks = app.add_subcommand("masksynth", "Synthesize masks with a mask model and best-of-K selection");
    add_config(masks, ms.common);
    masks->add_option("--mask-model", ms.model)->required()->check(CLI::ExistingFile);
    masks->add_option("--real-masks", ms.real_masks, "mask directory or corpus root")
        ->required()
        ->check(CLI::ExistingDirectory);
    masks->add_option("--k", ms.k, "overrides mask.k (4)");
    masks->add_option("--seed", ms.seed)->capture_default_str();
    masks->add_option("--out", ms.out, "output directory")->required();

    EvalArgs ev;
    CLI::App* eval = app.add_subcommand("eval", "Compare generated images with references");
    add_config(eval, ev.common);
    eval->add_option("--gen", ev.gen, "generated corpus root")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--ref", ev.ref, "reference images")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--metrics", ev.metrics)
        ->delimiter(',')
        ->check(CLI::IsMember({"mmd", "frechet", "psnr", "iou"}))
        ->capture_default_str();
    eval->add_option("--iou-threshold", ev.iou_threshold)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    eval->add_option("--out", ev.out)->capture_default_str();

    EmbedArgs em;
    CLI::App* embed = app.add_subcommand("embed", "2-D PCA embedding of feature vectors");
    add_config(embed, em.common);
    embed->add_option("--sets", em.sets, "NAME=DIR[,NAME=DIR...]")->required()->delimiter(',');
    embed->add_option("--out", em.out)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "distflow: " << e.what() << '\n';
        return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
    }

    try {
        if (*datagen) run_datagen(dg);
        if (*pretrain) run_pretrain(pt);
        if (*train) run_train(tr);
        if (*samp) run_sample(sa);
        if (*masks) run_masksynth(ms);
        if (*eval) run_eval(ev);
        if (*embed) run_embed(em);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::cerr << "distflow: error: " << msg << '\n';
        return 1;
    }
    return 0;
}
