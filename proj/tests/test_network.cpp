// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/network.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "gradcheck.hpp"

using namespace distflow;
using distflow::testing::perturbed_net;
using distflow::testing::tiny_arch;
using distflow::testing::worst_param_error;

namespace {

struct Inputs {
    Matrix x;
    Vector t;
    Matrix cond;
    Flags uncond;
};

Inputs random_inputs(const NetArch& arch, Eigen::Index batch, std::uint64_t seed) {
    Rng rng(seed);
    Inputs in;
    in.x = standard_normal(rng, batch, arch.pixels());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    in.t.resize(batch);
    for (Eigen::Index i = 0; i < batch; ++i) {
        in.t(i) = unit(rng);
    }
    in.cond = (standard_normal(rng, batch, arch.pixels()).array() > 0.0).cast<double>().matrix();
    in.uncond = Flags(batch);
    for (Eigen::Index i = 0; i < batch; ++i) {
        in.uncond(i) = i % 3 == 0;
    }
    return in;
}

}  // namespace

TEST_CASE("time embedding endpoints") {
    Vector t(2);
    t << 0.0, 1.0;
    const Matrix e = time_embedding(t, 6);
    REQUIRE(e.rows() == 2);
    REQUIRE(e.cols() == 6);
    for (int k = 0; k < 3; ++k) {
        CHECK(e(0, k) == 0.0);
        CHECK(e(0, 3 + k) == 1.0);
    }
    CHECK(e(1, 0) == doctest::Approx(std::sin(1.0)));
    CHECK(e(1, 2) == doctest::Approx(std::sin(100.0)));
}

TEST_CASE("forward gradients match finite differences for every parameter") {
    const NetArch arch = tiny_arch();
    ControlledVectorFieldNet net = perturbed_net(arch, 5);
    net.base().set_frozen(false);
    const Inputs in = random_inputs(arch, 4, 6);
    Rng rng(7);
    const Matrix probe = standard_normal(rng, 4, arch.pixels());

    auto loss = [&](ad::Tape& tape) {
        ad::Var v = net.forward(tape, in.x, in.t, in.cond, in.uncond);
        return ad::sum(ad::cwise_product(v, tape.constant(probe)));
    };
    ad::Tape tape;
    const Gradients g = tape.backward(loss(tape));
    auto f = [&] {
        ad::Tape t;
        return loss(t).value()(0, 0);
    };
    CHECK(worst_param_error(net.base(), g, f) < 1e-6);
    CHECK(worst_param_error(net.control(), g, f) < 1e-6);
}

TEST_CASE("zero-initialized control leaves the base output bitwise unchanged") {
    NetArch arch = tiny_arch();
    const ControlledVectorFieldNet base = ControlledVectorFieldNet::make_base(arch, 3);
    ControlledVectorFieldNet controlled = base;
    controlled.attach_control(4);
    const Inputs in = random_inputs(arch, 5, 8);
    const Matrix expected = base.predict(in.x, in.t, in.cond, in.uncond);
    const Matrix got = controlled.predict(in.x, in.t, in.cond, in.uncond);
    CHECK((expected.array() == got.array()).all());
}

TEST_CASE("control branch copies the base trunk") {
    ControlledVectorFieldNet net = ControlledVectorFieldNet::make_base(tiny_arch(), 1);
    net.attach_control(2);
    CHECK(net.control().at("ctrl/in.w").value == net.base().at("base/in.w").value);
    CHECK(net.control().at("ctrl/block1.fc2.w").value == net.base().at("base/block1.fc2.w").value);
    CHECK_FALSE(net.control().contains("ctrl/skip.w"));
    for (const char* name : {"ctrl/zero0.w", "ctrl/cskip.w", "ctrl/xskip.w", "ctrl/out.w", "ctrl/out.b"}) {
        CHECK(net.control().at(name).value.isZero(0.0));
    }
    CHECK_THROWS_AS(net.attach_control(3), std::invalid_argument);
}

TEST_CASE("unconditional rows ignore the condition") {
    const NetArch arch = tiny_arch();
    const ControlledVectorFieldNet net = perturbed_net(arch, 9);
    Inputs in = random_inputs(arch, 3, 10);
    in.uncond = flags(3, true);
    const Matrix a = net.predict(in.x, in.t, in.cond, in.uncond);
    const Matrix b = net.predict(in.x, in.t, Matrix::Ones(3, arch.pixels()), in.uncond);
    CHECK((a.array() == b.array()).all());

    in.uncond = flags(3, false);
    const Matrix c = net.predict(in.x, in.t, in.cond, in.uncond);
    const Matrix d = net.predict(in.x, in.t, Matrix::Ones(3, arch.pixels()), in.uncond);
    CHECK_FALSE((c.array() == d.array()).all());
}

TEST_CASE("frozen view tracks nothing") {
    const NetArch arch = tiny_arch();
    const ControlledVectorFieldNet net = perturbed_net(arch, 12);
    const Inputs in = random_inputs(arch, 2, 13);
    ad::Tape tape;
    ad::Var v = net.forward(tape, in.x, in.t, in.cond, in.uncond, ControlledVectorFieldNet::View::frozen);
    CHECK_FALSE(v.requires_grad());
    CHECK(net.frozen_copy().is_frozen());
    CHECK_FALSE(net.is_frozen());
}

TEST_CASE("forward rejects mismatched shapes") {
    const NetArch arch = tiny_arch();
    const ControlledVectorFieldNet net = perturbed_net(arch, 14);
    const Inputs in = random_inputs(arch, 2, 15);
    ad::Tape tape;
    CHECK_THROWS_AS(net.forward(tape, Matrix::Zero(2, 5), in.t, in.cond, in.uncond), std::invalid_argument);
    CHECK_THROWS_AS(net.forward(tape, in.x, in.t, Matrix::Zero(3, arch.pixels()), in.uncond),
                    std::invalid_argument);
    CHECK_THROWS_AS(net.forward(tape, in.x, Vector::Zero(3), in.cond, in.uncond), std::invalid_argument);
    NetArch bad = arch;
    bad.time_features = 3;
    CHECK_THROWS_AS(ControlledVectorFieldNet::make_base(bad, 0), std::invalid_argument);
}
