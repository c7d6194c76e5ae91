// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "distflow/autodiff.hpp"
#include "distflow/params.hpp"

namespace distflow {

struct NetArch {
    int image_size = 16;  ///< square images, image_size^2 pixels
    int hidden = 128;
    int blocks = 3;
    int time_features = 32;  ///< sinusoidal features, half sine and half cosine

    int pixels() const { return image_size * image_size; }
    void validate() const;
    friend bool operator==(const NetArch&, const NetArch&) = default;
};

/// Sinusoidal embedding of per-sample times: B x time_features.
Matrix time_embedding(const Vector& t, int features);

/// Vector-field network v(x_t, t, cond) made of a frozen unconditional base
/// trunk and an optional trainable control branch.
///
/// Base: h = W_in x + b_in + SiLU(W_t e(t) + b_t), then `blocks` residual
/// blocks h += W2 SiLU(W1 SiLU(h) + b1 + temb) + b2, then
/// v = W_out SiLU(h) + b_out + x (.) (W_skip temb + b_skip).
///
/// Control: a trunk with the base shapes that also sees the condition and the
/// unconditional flag. After each block k its state c_k is projected by a
/// zero-initialized linear map and added into the base state h_k. Three more
/// zero-initialized maps act on the output: two map the control time
/// embedding to pixelwise scales of the condition and of x_t, one projects
/// SiLU of the final control state. All three are added to v.
class ControlledVectorFieldNet {
public:
    enum class View {
        live,    ///< trainable parameters are tracked on the tape
        frozen,  ///< every parameter enters the tape as a constant
    };

    ControlledVectorFieldNet() = default;

    /// Base trunk with N(0, 1/fan_in) weights and zero biases; no control branch.
    static ControlledVectorFieldNet make_base(const NetArch& arch, std::uint64_t seed);

    /// Adds a control branch: trunk weights copied from the base, condition
    /// projection drawn from N(0, 1/fan_in), all injection projections zero.
    void attach_control(std::uint64_t seed);

    /// Returns a tensor with x_t's shape. Rows of cond whose uncond flag is set
    /// are zeroed before the first layer.
    ad::Var forward(ad::Tape& tape, const Matrix& x_t, const Vector& t, const Matrix& cond,
                    const Flags& uncond, View view = View::live) const;

    /// Untracked evaluation on a private tape.
    Matrix predict(const Matrix& x_t, const Vector& t, const Matrix& cond, const Flags& uncond) const;

    /// Copy with every parameter frozen.
    ControlledVectorFieldNet frozen_copy() const;
    bool is_frozen() const { return base_.all_frozen() && control_.all_frozen(); }

    const NetArch& arch() const { return arch_; }
    bool has_control() const { return has_control_; }
    ParamSet& base() { return base_; }
    const ParamSet& base() const { return base_; }
    ParamSet& control() { return control_; }
    const ParamSet& control() const { return control_; }

    /// Rebuilds a net from stored parameter sets (checkpoint loading).
    static ControlledVectorFieldNet from_params(const NetArch& arch, ParamSet base, ParamSet control);

private:
    NetArch arch_;
    ParamSet base_;
    ParamSet control_;
    bool has_control_ = false;
};

/// Linear layer with weight (out x in) and bias (1 x out) stored in `set`
/// under "<prefix>.w" / "<prefix>.b".
ad::Var linear(ad::Tape& tape, const ParamSet& set, const std::string& prefix, ad::Var x, bool detach);

/// Uniform per-sample flags.
inline Flags flags(Eigen::Index n, bool value) { return Flags::Constant(n, value); }

}  // namespace distflow
