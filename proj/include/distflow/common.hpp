// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace distflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Flags = Eigen::Array<bool, Eigen::Dynamic, 1>;
using Rng = std::mt19937_64;

template <typename... Args>
std::string concat(Args&&... args) {
    std::ostringstream os;
    (os << ... << std::forward<Args>(args));
    return os.str();
}

template <typename... Args>
void require(bool condition, Args&&... message) {
    if (!condition) {
        throw std::invalid_argument(concat(std::forward<Args>(message)...));
    }
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
    return m.derived().array().isFinite().all();
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const std::string& what) {
    if (!all_finite(m)) {
        throw std::domain_error(what + ": non-finite value");
    }
}

template <typename Derived1, typename Derived2>
void require_same_shape(const Eigen::DenseBase<Derived1>& a, const Eigen::DenseBase<Derived2>& b,
                        const std::string& what) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), what, ": shape mismatch (", a.rows(), "x",
            a.cols(), " vs ", b.rows(), "x", b.cols(), ")");
}

/// Point on the unit time interval; noise lives at 0, data at 1.
class TimeValue {
public:
    constexpr TimeValue() = default;
    explicit TimeValue(double t) : t_(t) {
        require(std::isfinite(t) && t >= 0.0 && t <= 1.0, "time ", t, " outside [0, 1]");
    }
    constexpr double value() const { return t_; }

private:
    double t_ = 0.0;
};

/// Matrix of i.i.d. standard normals drawn in column-major order.
inline Matrix standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out.data()[i] = normal(rng);
    }
    return out;
}

/// Independent stream for a named purpose, derived from a base seed.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

/// Row-major flattening of an H x W image into a 1 x HW row.
inline RowVector flatten(const Matrix& image) {
    RowMajorMatrix rm = image;
    return Eigen::Map<const RowVector>(rm.data(), rm.size());
}

inline Matrix unflatten(const Eigen::Ref<const RowVector>& row, Eigen::Index height, Eigen::Index width) {
    require(row.size() == height * width, "unflatten: ", row.size(), " values for ", height, "x", width);
    RowMajorMatrix rm = Eigen::Map<const RowMajorMatrix>(row.data(), height, width);
    return rm;
}

}  // namespace distflow
