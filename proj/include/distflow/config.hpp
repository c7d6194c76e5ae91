// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "distflow/masksynth.hpp"
#include "distflow/trainer.hpp"

namespace distflow {

/// Every tunable of the workflow. JSON layout:
///   { "train": {...}, "optimizer": {...}, "kernel": {...},
///     "sampler": {...}, "mask": {...}, "net": {...} }
/// Sections and keys are optional; unknown ones are rejected.
struct AppConfig {
    TrainConfig train;
    SamplerConfig sampler;
    MaskPipelineConfig mask;

    void validate() const;
};

AppConfig parse_config(const std::string& json_text);
AppConfig load_config(const std::filesystem::path& path);
std::string to_json(const AppConfig& cfg);
void write_resolved_config(const std::filesystem::path& path, const AppConfig& cfg);

}  // namespace distflow
