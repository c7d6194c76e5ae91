// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace distflow {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'A', 'F', 'L', 'W'};
const std::string kOptPrefix = "opt/";

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    bool done() const { return pos_ == bytes_.size(); }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        }
        return v;
    }

    double f64() {
        need(8, "tensor data");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) {
            bits |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        }
        return std::bit_cast<double>(bits);
    }

    std::string str(std::size_t n) {
        need(n, "record name");
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }

    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) {
            throw std::runtime_error(concat("checkpoint truncated while reading ", what, " at byte offset ", pos_));
        }
    }

    std::size_t pos() const { return pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

const Matrix& find(const std::vector<Record>& records, const std::string& name) {
    for (const Record& r : records) {
        if (r.name == name) {
            return r.value;
        }
    }
    throw std::runtime_error("checkpoint lacks record '" + name + "'");
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const std::vector<Record>& records) {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_u32(out, kCheckpointVersion);
    for (const Record& r : records) {
        require(!r.name.empty(), "checkpoint record with empty name");
        put_u32(out, static_cast<std::uint32_t>(r.name.size()));
        out.insert(out.end(), r.name.begin(), r.name.end());
        put_u32(out, 2);
        put_u32(out, static_cast<std::uint32_t>(r.value.rows()));
        put_u32(out, static_cast<std::uint32_t>(r.value.cols()));
        for (Eigen::Index i = 0; i < r.value.rows(); ++i) {
            for (Eigen::Index j = 0; j < r.value.cols(); ++j) {
                put_f64(out, r.value(i, j));
            }
        }
    }
    return out;
}

std::vector<Record> decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw std::runtime_error("checkpoint: bad magic at byte offset 0");
    }
    Reader in(bytes);
    in.str(4);
    const std::uint32_t version = in.u32("version");
    if (version != kCheckpointVersion) {
        throw std::runtime_error(concat("checkpoint: unsupported version ", version));
    }
    std::vector<Record> records;
    while (!in.done()) {
        Record r;
        const std::uint32_t len = in.u32("name length");
        r.name = in.str(len);
        const std::uint32_t ndim = in.u32("ndim");
        if (ndim > 2) {
            throw std::runtime_error(concat("checkpoint: record '", r.name, "' has ", ndim, " dims at byte offset ",
                                            in.pos()));
        }
        std::uint32_t dims[2] = {1, 1};
        for (std::uint32_t d = 0; d < ndim; ++d) {
            dims[2 - ndim + d] = in.u32("dims");
        }
        in.need(static_cast<std::size_t>(dims[0]) * dims[1] * 8, "tensor data");
        r.value.resize(dims[0], dims[1]);
        for (std::uint32_t i = 0; i < dims[0]; ++i) {
            for (std::uint32_t j = 0; j < dims[1]; ++j) {
                r.value(i, j) = in.f64();
            }
        }
        records.push_back(std::move(r));
    }
    return records;
}

void save_checkpoint(const fs::path& path, const std::vector<Record>& records) {
    const auto bytes = encode_checkpoint(records);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

std::vector<Record> load_checkpoint(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_checkpoint(bytes);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

std::vector<Record> to_records(const Snapshot& snap) {
    const NetArch& a = snap.net.arch();
    std::vector<Record> records;
    Matrix arch(1, 4);
    arch << a.image_size, a.hidden, a.blocks, a.time_features;
    records.push_back({"meta/arch", arch});
    records.push_back({"meta/stage", scalar(snap.stage)});
    records.push_back({"meta/iteration", scalar(static_cast<double>(snap.iteration))});
    for (const auto& [name, p] : snap.net.base()) {
        records.push_back({name, p.value});
    }
    for (const auto& [name, p] : snap.net.control()) {
        records.push_back({name, p.value});
    }
    records.push_back({kOptPrefix + "step", scalar(static_cast<double>(snap.optimizer.steps()))});
    for (const auto& [name, mo] : snap.optimizer.moments()) {
        records.push_back({kOptPrefix + "m/" + name, mo.m});
        records.push_back({kOptPrefix + "v/" + name, mo.v});
    }
    return records;
}

Snapshot from_records(const std::vector<Record>& records) {
    const Matrix& arch_row = find(records, "meta/arch");
    if (arch_row.size() != 4) {
        throw std::runtime_error("checkpoint: meta/arch must hold 4 values");
    }
    NetArch arch;
    arch.image_size = static_cast<int>(arch_row(0));
    arch.hidden = static_cast<int>(arch_row(1));
    arch.blocks = static_cast<int>(arch_row(2));
    arch.time_features = static_cast<int>(arch_row(3));

    ParamSet base;
    ParamSet control;
    std::map<std::string, AdamW::Moments> moments;
    for (const Record& r : records) {
        if (r.name.starts_with("base/")) {
            base.add(r.name, r.value, true);
        } else if (r.name.starts_with("ctrl/")) {
            control.add(r.name, r.value, false);
        } else if (r.name.starts_with(kOptPrefix + "m/")) {
            moments[r.name.substr(kOptPrefix.size() + 2)].m = r.value;
        } else if (r.name.starts_with(kOptPrefix + "v/")) {
            moments[r.name.substr(kOptPrefix.size() + 2)].v = r.value;
        }
    }
    Snapshot snap;
    snap.net = ControlledVectorFieldNet::from_params(arch, std::move(base), std::move(control));
    snap.stage = static_cast<int>(find(records, "meta/stage")(0));
    snap.iteration = static_cast<std::int64_t>(find(records, "meta/iteration")(0));
    snap.optimizer.restore(static_cast<std::int64_t>(find(records, kOptPrefix + "step")(0)), std::move(moments));
    return snap;
}

void save_snapshot(const fs::path& path, const Snapshot& snap) { save_checkpoint(path, to_records(snap)); }

Snapshot load_snapshot(const fs::path& path) {
    try {
        return from_records(load_checkpoint(path));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace distflow
