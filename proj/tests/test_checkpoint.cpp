// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/checkpoint.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace distflow;
using distflow::testing::perturbed_net;
using distflow::testing::TempDir;
using distflow::testing::tiny_arch;

namespace {

std::string error_of(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_checkpoint(bytes);
    } catch (const std::runtime_error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("record layout is little-endian and row-major") {
    Matrix m(2, 2);
    m << 1.0, 2.0, 3.0, 4.0;
    const auto bytes = encode_checkpoint({{"ab", m}});
    const std::vector<std::uint8_t> head = {'A', 'F', 'L', 'W', 1, 0, 0, 0, 2, 0, 0, 0, 'a', 'b',
                                            2,   0,   0,   0,   2, 0, 0, 0, 2, 0, 0, 0};
    REQUIRE(bytes.size() == head.size() + 4 * 8);
    CHECK(std::equal(head.begin(), head.end(), bytes.begin()));
    // 2.0 as IEEE-754 double: 0x4000000000000000, stored second.
    const std::vector<std::uint8_t> two = {0, 0, 0, 0, 0, 0, 0, 0x40};
    CHECK(std::equal(two.begin(), two.end(), bytes.begin() + static_cast<std::ptrdiff_t>(head.size()) + 8));

    const auto back = decode_checkpoint(bytes);
    REQUIRE(back.size() == 1);
    CHECK(back[0].name == "ab");
    CHECK(back[0].value == m);
}

TEST_CASE("decoding errors") {
    CHECK(error_of({'N', 'O', 'P', 'E', 1, 0, 0, 0}).find("magic") != std::string::npos);
    CHECK(error_of({'A', 'F', 'L', 'W', 9, 0, 0, 0}).find("version") != std::string::npos);
    auto bytes = encode_checkpoint({{"w", Matrix::Ones(2, 3)}});
    bytes.resize(bytes.size() - 5);
    const std::string truncated = error_of(bytes);
    CHECK(truncated.find("truncated") != std::string::npos);
    CHECK(truncated.find("byte offset") != std::string::npos);
}

TEST_CASE("snapshot round trip preserves parameters, flags and optimizer state") {
    ControlledVectorFieldNet net = perturbed_net(tiny_arch(), 81);
    net.base().set_frozen(true);
    AdamW opt;
    Gradients g;
    for (const auto& [name, p] : net.control()) {
        g[name] = Matrix::Constant(p.value.rows(), p.value.cols(), 0.1);
    }
    opt.step(net.control(), g, OptimizerConfig{});
    opt.step(net.control(), g, OptimizerConfig{});
    const Snapshot snap{net, opt, 2, 123};

    TempDir dir;
    save_snapshot(dir.path() / "s.ckpt", snap);
    const Snapshot back = load_snapshot(dir.path() / "s.ckpt");
    CHECK(back.stage == 2);
    CHECK(back.iteration == 123);
    CHECK(back.net.arch() == net.arch());
    CHECK(back.net.base() == net.base());
    CHECK(back.net.control() == net.control());
    CHECK(back.net.base().all_frozen());
    CHECK(back.optimizer.steps() == 2);
    REQUIRE(back.optimizer.moments().size() == opt.moments().size());
    for (const auto& [name, mo] : opt.moments()) {
        CHECK(back.optimizer.moments().at(name).m == mo.m);
        CHECK(back.optimizer.moments().at(name).v == mo.v);
    }
    CHECK(encode_checkpoint(to_records(back)) == encode_checkpoint(to_records(snap)));
}

TEST_CASE("base-only snapshot has no control branch") {
    const ControlledVectorFieldNet base = ControlledVectorFieldNet::make_base(tiny_arch(), 82);
    const Snapshot back = from_records(to_records(Snapshot{base, AdamW(), 0, 0}));
    CHECK_FALSE(back.net.has_control());
    CHECK(back.stage == 0);
    CHECK_THROWS_AS(load_snapshot("/nonexistent/x.ckpt"), std::runtime_error);
}
