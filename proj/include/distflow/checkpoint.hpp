// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

// Binary checkpoint format:
//   "AFLW" | version u32 | records...
//   record = name_len u32 | name (utf-8) | ndim u32 | dims u32 x ndim | data f64 x prod(dims)
// All integers and floats little-endian; matrix data in row-major order.
// Optimizer state lives under the reserved "opt/" prefix.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "distflow/network.hpp"
#include "distflow/optim.hpp"

namespace distflow {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Record {
    std::string name;
    Matrix value;
};

std::vector<std::uint8_t> encode_checkpoint(const std::vector<Record>& records);
std::vector<Record> decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const std::vector<Record>& records);
std::vector<Record> load_checkpoint(const std::filesystem::path& path);

/// Everything needed to resume: network, optimizer state and progress markers.
struct Snapshot {
    ControlledVectorFieldNet net;
    AdamW optimizer;
    int stage = 0;          ///< 0 = base pretraining, 1 or 2
    std::int64_t iteration = 0;
};

std::vector<Record> to_records(const Snapshot& snap);
/// Base parameters load frozen, control parameters trainable.
Snapshot from_records(const std::vector<Record>& records);

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace distflow
