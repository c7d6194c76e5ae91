// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace distflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Section {
public:
    Section(const json& root, const std::string& name) : name_(name) {
        if (!root.contains(name)) {
            return;
        }
        node_ = &root.at(name);
        if (!node_->is_object()) {
            throw std::invalid_argument("config: section '" + name + "' must be an object");
        }
        for (const auto& [key, value] : node_->items()) {
            unseen_.insert(key);
        }
    }

    template <typename T>
    void read(const std::string& key, T& out) {
        if (node_ == nullptr || !node_->contains(key)) {
            return;
        }
        unseen_.erase(key);
        try {
            out = node_->at(key).get<T>();
        } catch (const json::exception&) {
            throw std::invalid_argument("config: " + name_ + "." + key + " has the wrong type");
        }
    }

    void finish() const {
        if (!unseen_.empty()) {
            throw std::invalid_argument("config: unknown key '" + name_ + "." + *unseen_.begin() + "'");
        }
    }

private:
    std::string name_;
    const json* node_ = nullptr;
    std::set<std::string> unseen_;
};

}  // namespace

void AppConfig::validate() const {
    train.validate();
    sampler.validate();
    mask.validate();
}

AppConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw std::invalid_argument("config: top level must be an object");
    }
    static const std::set<std::string> kSections = {"train", "optimizer", "kernel", "sampler", "mask", "net"};
    for (const auto& [key, value] : root.items()) {
        if (!kSections.count(key)) {
            throw std::invalid_argument("config: unknown section '" + key + "'");
        }
    }

    AppConfig cfg;
    TrainConfig& t = cfg.train;
    std::string reward = "mmd";
    {
        Section s(root, "train");
        s.read("pretrain_iters", t.pretrain_iters);
        s.read("stage1_iters", t.stage1_iters);
        s.read("stage2_iters", t.stage2_iters);
        s.read("w_align", t.w_align);
        s.read("t_s_index", t.t_s_index);
        s.read("d_t", t.d_t);
        s.read("cond_dropout_prob", t.cond_dropout_prob);
        s.read("reward", reward);
        s.read("seed", t.seed);
        s.read("log_every", t.log_every);
        s.finish();
    }
    {
        Section s(root, "optimizer");
        OptimizerConfig& o = t.optimizer;
        s.read("learning_rate", o.learning_rate);
        s.read("weight_decay", o.weight_decay);
        s.read("beta1", o.beta1);
        s.read("beta2", o.beta2);
        s.read("epsilon", o.epsilon);
        s.read("batch_size", o.batch_size);
        s.finish();
    }
    KernelConfig kernel;
    {
        Section s(root, "kernel");
        s.read("c", kernel.c);
        s.read("degree", kernel.degree);
        s.read("dim_scale", kernel.dim_scale);
        s.finish();
    }
    if (reward == "mmd") {
        t.reward = MmdKind{kernel};
    } else if (reward == "skl") {
        t.reward = SklKind{};
    } else {
        throw std::invalid_argument("config: train.reward must be \"mmd\" or \"skl\", got \"" + reward + "\"");
    }
    {
        Section s(root, "sampler");
        s.read("steps", cfg.sampler.steps);
        s.read("guidance_scale", cfg.sampler.guidance_scale);
        s.read("d_t", cfg.sampler.d_t);
        s.finish();
    }
    {
        Section s(root, "mask");
        MaskPipelineConfig& m = cfg.mask;
        s.read("threshold", m.threshold);
        s.read("blur_sigma", m.blur_sigma);
        s.read("blur_kernel", m.blur_kernel);
        s.read("structuring_element", m.structuring_element);
        s.read("k", m.k);
        s.finish();
    }
    {
        Section s(root, "net");
        NetArch& a = t.arch;
        s.read("image_size", a.image_size);
        s.read("hidden", a.hidden);
        s.read("blocks", a.blocks);
        s.read("time_features", a.time_features);
        s.finish();
    }
    cfg.validate();
    return cfg;
}

AppConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

std::string to_json(const AppConfig& cfg) {
    const TrainConfig& t = cfg.train;
    const auto* mmd = std::get_if<MmdKind>(&t.reward);
    const KernelConfig kernel = mmd ? mmd->kernel : KernelConfig{};
    json root = {
        {"train",
         {{"pretrain_iters", t.pretrain_iters},
          {"stage1_iters", t.stage1_iters},
          {"stage2_iters", t.stage2_iters},
          {"w_align", t.w_align},
          {"t_s_index", t.t_s_index},
          {"d_t", t.d_t},
          {"cond_dropout_prob", t.cond_dropout_prob},
          {"reward", mmd ? "mmd" : "skl"},
          {"seed", t.seed},
          {"log_every", t.log_every}}},
        {"optimizer",
         {{"learning_rate", t.optimizer.learning_rate},
          {"weight_decay", t.optimizer.weight_decay},
          {"beta1", t.optimizer.beta1},
          {"beta2", t.optimizer.beta2},
          {"epsilon", t.optimizer.epsilon},
          {"batch_size", t.optimizer.batch_size}}},
        {"kernel", {{"c", kernel.c}, {"degree", kernel.degree}, {"dim_scale", kernel.dim_scale}}},
        {"sampler",
         {{"steps", cfg.sampler.steps}, {"guidance_scale", cfg.sampler.guidance_scale}, {"d_t", cfg.sampler.d_t}}},
        {"mask",
         {{"threshold", cfg.mask.threshold},
          {"blur_sigma", cfg.mask.blur_sigma},
          {"blur_kernel", cfg.mask.blur_kernel},
          {"structuring_element", cfg.mask.structuring_element},
          {"k", cfg.mask.k}}},
        {"net",
         {{"image_size", t.arch.image_size},
          {"hidden", t.arch.hidden},
          {"blocks", t.arch.blocks},
          {"time_features", t.arch.time_features}}},
    };
    return root.dump(2) + "\n";
}

void write_resolved_config(const fs::path& path, const AppConfig& cfg) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << to_json(cfg);
}

}  // namespace distflow
