// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "distflow/common.hpp"

namespace distflow {

/// 8-bit quantization used on write: round(v * 255) with halves rounded up.
std::uint8_t quantize(double v);

/// Encodes an H x W image with values in [0, 1] as binary PGM (P5, maxval 255).
std::vector<std::uint8_t> encode_pgm(const Matrix& image);
/// Decodes binary PGM; values are returned as byte/255. Errors carry the byte offset.
Matrix decode_pgm(const std::vector<std::uint8_t>& bytes);

void write_pgm(const std::filesystem::path& path, const Matrix& image);
Matrix read_pgm(const std::filesystem::path& path);

/// Sorted list of *.pgm files in a directory.
std::vector<std::filesystem::path> list_pgm(const std::filesystem::path& dir);

}  // namespace distflow
