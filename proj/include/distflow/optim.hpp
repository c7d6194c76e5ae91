// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "distflow/autodiff.hpp"
#include "distflow/params.hpp"

namespace distflow {

struct OptimizerConfig {
    double learning_rate = 1e-3;
    double weight_decay = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 4;

    void validate() const;
};

/// AdamW with decoupled weight decay:
///   p <- p - lr * wd * p - lr * m_hat / (sqrt(v_hat) + eps)
class AdamW {
public:
    struct Moments {
        Matrix m;
        Matrix v;
    };

    /// Updates every non-frozen tensor of `params`; frozen tensors are not touched.
    /// Throws if a trainable tensor has no gradient.
    void step(ParamSet& params, const Gradients& grads, const OptimizerConfig& cfg);

    std::int64_t steps() const { return step_; }
    const std::map<std::string, Moments>& moments() const { return moments_; }

    /// Restores state saved in a checkpoint.
    void restore(std::int64_t step, std::map<std::string, Moments> moments);

private:
    std::int64_t step_ = 0;
    std::map<std::string, Moments> moments_;
};

}  // namespace distflow
