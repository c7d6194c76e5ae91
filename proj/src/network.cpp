// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/network.hpp"

#include <numbers>

namespace distflow {

namespace {

constexpr double kMaxFrequency = 100.0;

void add_linear(ParamSet& set, Rng& rng, const std::string& prefix, int in, int out) {
    set.add(prefix + ".w", fan_in_normal(rng, out, in, in));
    set.add(prefix + ".b", Matrix::Zero(1, out));
}

std::string block_name(const std::string& root, int k, const char* layer) {
    return concat(root, "block", k, ".", layer);
}

ad::Var residual_block(ad::Tape& tape, const ParamSet& set, const std::string& root, int k, ad::Var h,
                       ad::Var temb, bool detach) {
    ad::Var u = linear(tape, set, block_name(root, k, "fc1"), ad::silu(h), detach) + temb;
    return h + linear(tape, set, block_name(root, k, "fc2"), ad::silu(u), detach);
}

}  // namespace

void NetArch::validate() const {
    require(image_size >= 1, "image_size must be positive");
    require(hidden >= 1, "hidden width must be positive");
    require(blocks >= 0, "block count must be non-negative");
    require(time_features >= 2 && time_features % 2 == 0, "time_features must be even and >= 2");
}

Matrix time_embedding(const Vector& t, int features) {
    const int half = features / 2;
    Matrix out(t.size(), features);
    for (int k = 0; k < half; ++k) {
        const double freq = half == 1 ? 1.0 : std::pow(kMaxFrequency, static_cast<double>(k) / (half - 1));
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            out(i, k) = std::sin(freq * t(i));
            out(i, half + k) = std::cos(freq * t(i));
        }
    }
    return out;
}

ad::Var linear(ad::Tape& tape, const ParamSet& set, const std::string& prefix, ad::Var x, bool detach) {
    ad::Var w = tape.parameter(prefix + ".w", set.at(prefix + ".w"), detach);
    ad::Var b = tape.parameter(prefix + ".b", set.at(prefix + ".b"), detach);
    return ad::add_row(ad::matmul_transposed(x, w), b);
}

ControlledVectorFieldNet ControlledVectorFieldNet::make_base(const NetArch& arch, std::uint64_t seed) {
    arch.validate();
    ControlledVectorFieldNet net;
    net.arch_ = arch;
    Rng rng = derive_rng(seed, 0xBA5E);
    const int p = arch.pixels();
    const int h = arch.hidden;
    add_linear(net.base_, rng, "base/in", p, h);
    add_linear(net.base_, rng, "base/time", arch.time_features, h);
    for (int k = 0; k < arch.blocks; ++k) {
        add_linear(net.base_, rng, block_name("base/", k, "fc1"), h, h);
        add_linear(net.base_, rng, block_name("base/", k, "fc2"), h, h);
    }
    add_linear(net.base_, rng, "base/out", h, p);
    add_linear(net.base_, rng, "base/skip", h, p);
    return net;
}

void ControlledVectorFieldNet::attach_control(std::uint64_t seed) {
    require(!has_control_, "control branch already attached");
    Rng rng = derive_rng(seed, 0xC0DE);
    const int p = arch_.pixels();
    const int h = arch_.hidden;
    const std::string base_root = "base/";
    for (const auto& [name, param] : base_) {
        if (name.starts_with("base/out") || name.starts_with("base/skip")) {
            continue;
        }
        control_.add("ctrl/" + name.substr(base_root.size()), param.value);
    }
    control_.add("ctrl/cond.w", fan_in_normal(rng, h, p, p));
    control_.add("ctrl/flag", fan_in_normal(rng, 1, h, 1));
    for (int k = 0; k < arch_.blocks; ++k) {
        control_.add(concat("ctrl/zero", k, ".w"), Matrix::Zero(h, h));
        control_.add(concat("ctrl/zero", k, ".b"), Matrix::Zero(1, h));
    }
    control_.add("ctrl/cskip.w", Matrix::Zero(p, h));
    control_.add("ctrl/cskip.b", Matrix::Zero(1, p));
    control_.add("ctrl/xskip.w", Matrix::Zero(p, h));
    control_.add("ctrl/xskip.b", Matrix::Zero(1, p));
    control_.add("ctrl/out.w", Matrix::Zero(p, h));
    control_.add("ctrl/out.b", Matrix::Zero(1, p));
    has_control_ = true;
}

ControlledVectorFieldNet ControlledVectorFieldNet::from_params(const NetArch& arch, ParamSet base,
                                                               ParamSet control) {
    arch.validate();
    ControlledVectorFieldNet net;
    net.arch_ = arch;
    net.base_ = std::move(base);
    net.control_ = std::move(control);
    net.has_control_ = net.control_.size() > 0;
    require(net.base_.contains("base/out.w"), "parameter set lacks base/out.w");
    require(net.base_.at("base/out.w").value.rows() == arch.pixels() &&
                net.base_.at("base/out.w").value.cols() == arch.hidden,
            "base parameters do not match the architecture");
    if (net.has_control_) {
        require(net.control_.contains("ctrl/cond.w"), "control parameter set lacks ctrl/cond.w");
    }
    return net;
}

ad::Var ControlledVectorFieldNet::forward(ad::Tape& tape, const Matrix& x_t, const Vector& t,
                                          const Matrix& cond, const Flags& uncond, View view) const {
    const Eigen::Index batch = x_t.rows();
    require(x_t.cols() == arch_.pixels(), "forward: x_t has ", x_t.cols(), " columns, architecture expects ",
            arch_.pixels());
    require(cond.rows() == batch && cond.cols() == arch_.pixels(), "forward: cond is ", cond.rows(), "x",
            cond.cols(), ", expected ", batch, "x", arch_.pixels());
    require(t.size() == batch && uncond.size() == batch, "forward: per-sample time/flag count mismatch");
    const bool detach = view == View::frozen;

    ad::Var x = tape.constant(x_t);
    ad::Var temb = tape.constant(time_embedding(t, arch_.time_features));

    ad::Var te = ad::silu(linear(tape, base_, "base/time", temb, detach));
    ad::Var h = linear(tape, base_, "base/in", x, detach) + te;

    ad::Var c;
    ad::Var tc;
    ad::Var cond_in;
    if (has_control_) {
        Matrix masked = cond;
        Matrix flag_col(batch, 1);
        for (Eigen::Index i = 0; i < batch; ++i) {
            if (uncond(i)) {
                masked.row(i).setZero();
            }
            flag_col(i, 0) = uncond(i) ? 1.0 : 0.0;
        }
        cond_in = tape.constant(std::move(masked));
        ad::Var flag_in = tape.constant(std::move(flag_col));
        tc = ad::silu(linear(tape, control_, "ctrl/time", temb, detach));
        c = linear(tape, control_, "ctrl/in", x, detach) + tc +
            ad::matmul_transposed(cond_in, tape.parameter("ctrl/cond.w", control_.at("ctrl/cond.w"), detach)) +
            ad::matmul(flag_in, tape.parameter("ctrl/flag", control_.at("ctrl/flag"), detach));
    }

    for (int k = 0; k < arch_.blocks; ++k) {
        h = residual_block(tape, base_, "base/", k, h, te, detach);
        if (has_control_) {
            c = residual_block(tape, control_, "ctrl/", k, c, tc, detach);
            h = h + linear(tape, control_, concat("ctrl/zero", k), c, detach);
        }
    }
    ad::Var v = linear(tape, base_, "base/out", ad::silu(h), detach) +
                ad::cwise_product(x, linear(tape, base_, "base/skip", te, detach));
    if (has_control_) {
        v = v + ad::cwise_product(cond_in, linear(tape, control_, "ctrl/cskip", tc, detach)) +
            ad::cwise_product(x, linear(tape, control_, "ctrl/xskip", tc, detach)) +
            linear(tape, control_, "ctrl/out", ad::silu(c), detach);
    }
    return v;
}

Matrix ControlledVectorFieldNet::predict(const Matrix& x_t, const Vector& t, const Matrix& cond,
                                         const Flags& uncond) const {
    ad::Tape tape;
    return forward(tape, x_t, t, cond, uncond, View::frozen).value();
}

ControlledVectorFieldNet ControlledVectorFieldNet::frozen_copy() const {
    ControlledVectorFieldNet copy = *this;
    copy.base_.set_frozen(true);
    copy.control_.set_frozen(true);
    return copy;
}

}  // namespace distflow
