// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/flow.hpp"

namespace distflow {

namespace {

constexpr double kGridTolerance = 1e-9;

}  // namespace

void SamplerConfig::validate() const {
    require(steps >= 1, "sampler steps must be >= 1, got ", steps);
    require(std::isfinite(guidance_scale) && guidance_scale >= 0.0, "guidance_scale must be >= 0");
    require(d_t > 0.0 && d_t <= 1.0, "d_t must lie in (0, 1], got ", d_t);
    const double cells = std::round(1.0 / d_t);
    require(std::abs(d_t * cells - 1.0) <= 1e-12, "d_t = ", d_t, " does not tile [0, 1]");
}

int SamplerConfig::grid_cells() const {
    validate();
    return static_cast<int>(std::round(1.0 / d_t));
}

Matrix sample(const ControlledVectorFieldNet& net, const Matrix& x0, const Matrix& cond, const SamplerConfig& cfg) {
    cfg.validate();
    require_finite(x0, "sample: x0");
    const Eigen::Index batch = x0.rows();
    const double dt = 1.0 / cfg.steps;
    const double g = cfg.guidance_scale;
    const Flags null_flags = flags(batch, true);
    const Flags cond_flags = flags(batch, false);

    Matrix x = x0;
    for (int k = 0; k < cfg.steps; ++k) {
        const Vector t = Vector::Constant(batch, k * dt);
        const Matrix v_uncond = net.predict(x, t, cond, null_flags);
        const Matrix v_cond = net.predict(x, t, cond, cond_flags);
        x = euler_step(x, (1.0 - g) * v_uncond + g * v_cond, dt);
        if (!all_finite(x)) {
            throw std::domain_error(concat("sample: non-finite state after step ", k));
        }
    }
    return x;
}

Matrix sample(const ControlledVectorFieldNet& net, const Matrix& cond, const SamplerConfig& cfg,
              std::uint64_t seed) {
    Rng rng(seed);
    return sample(net, standard_normal(rng, cond.rows(), net.arch().pixels()), cond, cfg);
}

int rollout_steps(TimeValue s, double d_t) {
    require(d_t > 0.0 && d_t <= 1.0, "d_t must lie in (0, 1], got ", d_t);
    const double cells = s.value() / d_t;
    const double n = std::round(cells);
    require(std::abs(s.value() - n * d_t) <= kGridTolerance, "rollout end time ", s.value(),
            " is not on the d_t = ", d_t, " grid");
    return static_cast<int>(n);
}

Matrix frozen_rollout(const ControlledVectorFieldNet& net_frozen, const Matrix& x0, const Matrix& cond,
                      const Flags& uncond, TimeValue s, double d_t) {
    require(net_frozen.is_frozen(), "frozen_rollout: network has trainable parameters");
    const int n = rollout_steps(s, d_t);
    Matrix x = x0;
    for (int i = 0; i < n; ++i) {
        const Vector t = Vector::Constant(x.rows(), i * d_t);
        x = euler_step(x, net_frozen.predict(x, t, cond, uncond), d_t);
    }
    return x;
}

ad::Var tunable_jump(ad::Tape& tape, const ControlledVectorFieldNet& net, const Matrix& x_s, TimeValue s,
                     const Matrix& cond, const Flags& uncond) {
    require(s.value() < 1.0, "tunable_jump: start time must be < 1, got ", s.value());
    const Vector t = Vector::Constant(x_s.rows(), s.value());
    ad::Var v = net.forward(tape, x_s, t, cond, uncond);
    return tape.constant(x_s) + ad::scale(v, 1.0 - s.value());
}

}  // namespace distflow
