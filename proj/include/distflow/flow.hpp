// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

// Straight (optimal-transport) probability paths and Euler integrators.
// Convention: x_0 is noise at t = 0 and x_1 is data at t = 1.

#pragma once

#include <cstdint>

#include "distflow/network.hpp"

namespace distflow {

struct SamplerConfig {
    int steps = 28;
    double guidance_scale = 7.0;
    double d_t = 1.0 / 20.0;

    void validate() const;
    /// Number of d_t cells tiling [0, 1].
    int grid_cells() const;
};

/// t * x1 + (1 - t) * eps.
template <typename D1, typename D2>
Matrix interpolate(const Eigen::MatrixBase<D1>& x1, const Eigen::MatrixBase<D2>& eps, TimeValue t) {
    require_same_shape(x1, eps, "interpolate");
    const double s = t.value();
    return s * x1 + (1.0 - s) * eps;
}

/// Row-wise interpolation with one time per sample.
template <typename D1, typename D2>
Matrix interpolate(const Eigen::MatrixBase<D1>& x1, const Eigen::MatrixBase<D2>& eps, const Vector& t) {
    require_same_shape(x1, eps, "interpolate");
    require(t.size() == x1.rows(), "interpolate: ", t.size(), " times for ", x1.rows(), " rows");
    Matrix out(x1.rows(), x1.cols());
    for (Eigen::Index i = 0; i < x1.rows(); ++i) {
        const double s = TimeValue(t(i)).value();
        out.row(i) = s * x1.row(i) + (1.0 - s) * eps.row(i);
    }
    return out;
}

/// Constant-in-t target field of the straight path, x1 - eps.
template <typename D1, typename D2>
Matrix target_vector_field(const Eigen::MatrixBase<D1>& x1, const Eigen::MatrixBase<D2>& eps) {
    require_same_shape(x1, eps, "target_vector_field");
    return x1 - eps;
}

template <typename D1, typename D2>
Matrix euler_step(const Eigen::MatrixBase<D1>& x, const Eigen::MatrixBase<D2>& v, double dt) {
    require_same_shape(x, v, "euler_step");
    require(dt > 0.0, "euler_step: dt must be positive, got ", dt);
    return x + dt * v;
}

/// Integrates t: 0 -> 1 in cfg.steps uniform Euler steps with classifier-free
/// guidance v = (1 - g) v_uncond + g v_cond. Each step evaluates the
/// unconditional branch first, then the conditional one.
Matrix sample(const ControlledVectorFieldNet& net, const Matrix& x0, const Matrix& cond, const SamplerConfig& cfg);

/// As above with x0 drawn from N(0, I) using `seed`.
Matrix sample(const ControlledVectorFieldNet& net, const Matrix& cond, const SamplerConfig& cfg,
              std::uint64_t seed);

/// Number of d_t steps needed to reach s; throws if s is off the grid.
int rollout_steps(TimeValue s, double d_t);

/// Iterates x <- x + d_t v(x, t, cond) from t = 0 to t = s with a fully frozen
/// network. The result is a plain value with no graph attached.
Matrix frozen_rollout(const ControlledVectorFieldNet& net_frozen, const Matrix& x0, const Matrix& cond,
                      const Flags& uncond, TimeValue s, double d_t);

/// x_s + (1 - s) v(x_s, s, cond): a single tracked evaluation from x_s to the
/// predicted clean sample.
ad::Var tunable_jump(ad::Tape& tape, const ControlledVectorFieldNet& net, const Matrix& x_s, TimeValue s,
                     const Matrix& cond, const Flags& uncond);

}  // namespace distflow
