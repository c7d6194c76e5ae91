// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/optim.hpp"

namespace distflow {

void OptimizerConfig::validate() const {
    require(learning_rate > 0.0, "learning_rate must be positive");
    require(weight_decay >= 0.0, "weight_decay must be non-negative");
    require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "betas must lie in [0, 1)");
    require(epsilon > 0.0, "epsilon must be positive");
    require(batch_size >= 1, "batch_size must be positive");
}

void AdamW::step(ParamSet& params, const Gradients& grads, const OptimizerConfig& cfg) {
    cfg.validate();
    for (const auto& [name, p] : params) {
        if (!p.frozen) {
            auto it = grads.find(name);
            require(it != grads.end(), "adamw: missing gradient for trainable parameter '", name, "'");
            require_same_shape(it->second, p.value, "adamw gradient '" + name + "'");
        }
    }

    ++step_;
    const double t = static_cast<double>(step_);
    const double bias1 = 1.0 - std::pow(cfg.beta1, t);
    const double bias2 = 1.0 - std::pow(cfg.beta2, t);

    for (auto& [name, p] : params) {
        if (p.frozen) {
            continue;
        }
        const Matrix& g = grads.at(name);
        auto [it, fresh] = moments_.try_emplace(name);
        Moments& mo = it->second;
        if (fresh || mo.m.size() == 0) {
            mo.m = Matrix::Zero(g.rows(), g.cols());
            mo.v = Matrix::Zero(g.rows(), g.cols());
        }
        mo.m = cfg.beta1 * mo.m + (1.0 - cfg.beta1) * g;
        mo.v = cfg.beta2 * mo.v + (1.0 - cfg.beta2) * g.cwiseProduct(g);

        p.value *= 1.0 - cfg.learning_rate * cfg.weight_decay;
        p.value.array() -= cfg.learning_rate * (mo.m.array() / bias1) /
                           ((mo.v.array() / bias2).sqrt() + cfg.epsilon);
    }
}

void AdamW::restore(std::int64_t step, std::map<std::string, Moments> moments) {
    require(step >= 0, "adamw: negative step counter");
    step_ = step;
    moments_ = std::move(moments);
}

}  // namespace distflow
