// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

namespace distflow {

namespace fs = std::filesystem;

namespace {

class HeaderReader {
public:
    explicit HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                return;
            }
        }
    }

    long number(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000) {
                fail(concat("pgm: ", what, " too large"), start);
            }
            ++pos_;
        }
        if (pos_ == start) {
            fail(concat("pgm: expected ", what), start);
        }
        return value;
    }

    [[noreturn]] void fail(const std::string& message, std::size_t offset) const {
        throw std::runtime_error(concat(message, " at byte offset ", offset));
    }

    std::size_t pos_ = 0;

private:
    const std::vector<std::uint8_t>& bytes_;
};

}  // namespace

std::uint8_t quantize(double v) {
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "pgm: pixel value ", v, " outside [0, 1]");
    return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

std::vector<std::uint8_t> encode_pgm(const Matrix& image) {
    require(image.size() > 0, "pgm: empty image");
    const std::string header = concat("P5\n", image.cols(), " ", image.rows(), "\n255\n");
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + static_cast<std::size_t>(image.size()));
    for (Eigen::Index r = 0; r < image.rows(); ++r) {
        for (Eigen::Index c = 0; c < image.cols(); ++c) {
            out.push_back(quantize(image(r, c)));
        }
    }
    return out;
}

Matrix decode_pgm(const std::vector<std::uint8_t>& bytes) {
    HeaderReader reader(bytes);
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        reader.fail("pgm: missing P5 magic", 0);
    }
    reader.pos_ = 2;
    const long width = reader.number("width");
    const long height = reader.number("height");
    const long maxval = reader.number("maxval");
    if (width < 1 || height < 1) {
        reader.fail("pgm: non-positive dimensions", reader.pos_);
    }
    if (maxval != 255) {
        reader.fail(concat("pgm: unsupported maxval ", maxval), reader.pos_);
    }
    if (reader.pos_ >= bytes.size() || !std::isspace(bytes[reader.pos_])) {
        reader.fail("pgm: expected whitespace after maxval", reader.pos_);
    }
    ++reader.pos_;
    const std::size_t needed = static_cast<std::size_t>(width * height);
    if (bytes.size() - reader.pos_ < needed) {
        reader.fail(concat("pgm: truncated payload, expected ", needed, " bytes, found ", bytes.size() - reader.pos_),
                    bytes.size());
    }
    Matrix image(height, width);
    std::size_t at = reader.pos_;
    for (long r = 0; r < height; ++r) {
        for (long c = 0; c < width; ++c) {
            image(r, c) = bytes[at++] / 255.0;
        }
    }
    return image;
}

void write_pgm(const fs::path& path, const Matrix& image) {
    const std::vector<std::uint8_t> bytes = encode_pgm(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

Matrix read_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_pgm(bytes);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

std::vector<fs::path> list_pgm(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw std::runtime_error("not a directory: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace distflow
