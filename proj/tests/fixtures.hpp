// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "distflow/network.hpp"

namespace distflow::testing {

/// 3x3 images, width 8: small enough for exhaustive finite differences.
inline NetArch tiny_arch() {
    NetArch a;
    a.image_size = 3;
    a.hidden = 8;
    a.blocks = 2;
    a.time_features = 4;
    return a;
}

/// Base plus control branch with every zero-initialized tensor replaced by
/// small random values so that all parameters influence the output.
inline ControlledVectorFieldNet perturbed_net(const NetArch& arch, std::uint64_t seed, double scale = 0.3) {
    ControlledVectorFieldNet net = ControlledVectorFieldNet::make_base(arch, seed);
    net.attach_control(seed + 1);
    Rng rng(seed + 2);
    for (ParamSet* set : {&net.base(), &net.control()}) {
        for (auto& [name, p] : *set) {
            p.value += scale * standard_normal(rng, p.value.rows(), p.value.cols());
        }
    }
    return net;
}

}  // namespace distflow::testing

namespace distflow::testing {

/// Network whose output is the row `c` for every input: all base weights
/// zero except the output bias.
inline ControlledVectorFieldNet constant_field_net(const NetArch& arch, const RowVector& c, bool with_control) {
    ControlledVectorFieldNet net = ControlledVectorFieldNet::make_base(arch, 0);
    for (auto& [name, p] : net.base()) {
        p.value.setZero();
    }
    net.base().at("base/out.b").value = c;
    if (with_control) {
        net.attach_control(1);
    }
    return net;
}

}  // namespace distflow::testing

#include <filesystem>
#include <random>

namespace distflow::testing {

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / concat("distflow-test-", rd(), "-", rd());
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace distflow::testing
