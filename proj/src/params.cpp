// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/params.hpp"

namespace distflow {

Parameter& ParamSet::add(const std::string& name, Matrix value, bool frozen) {
    require(!name.empty(), "parameter name must be non-empty");
    require(!contains(name), "duplicate parameter name '", name, "'");
    require_finite(value, "parameter '" + name + "'");
    auto [it, inserted] = params_.emplace(name, Parameter{std::move(value), frozen});
    return it->second;
}

Parameter& ParamSet::at(const std::string& name) {
    auto it = params_.find(name);
    require(it != params_.end(), "unknown parameter '", name, "'");
    return it->second;
}

const Parameter& ParamSet::at(const std::string& name) const {
    auto it = params_.find(name);
    require(it != params_.end(), "unknown parameter '", name, "'");
    return it->second;
}

void ParamSet::set_frozen(bool frozen) {
    for (auto& [name, p] : params_) {
        p.frozen = frozen;
    }
}

bool ParamSet::all_frozen() const {
    for (const auto& [name, p] : params_) {
        if (!p.frozen) {
            return false;
        }
    }
    return true;
}

Eigen::Index ParamSet::scalar_count() const {
    Eigen::Index n = 0;
    for (const auto& [name, p] : params_) {
        n += p.value.size();
    }
    return n;
}

bool operator==(const ParamSet& a, const ParamSet& b) {
    if (a.params_.size() != b.params_.size()) {
        return false;
    }
    for (auto ia = a.params_.begin(), ib = b.params_.begin(); ia != a.params_.end(); ++ia, ++ib) {
        if (ia->first != ib->first || ia->second.frozen != ib->second.frozen) {
            return false;
        }
        const Matrix& x = ia->second.value;
        const Matrix& y = ib->second.value;
        if (x.rows() != y.rows() || x.cols() != y.cols() || !(x.array() == y.array()).all()) {
            return false;
        }
    }
    return true;
}

Matrix fan_in_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in) {
    return standard_normal(rng, rows, cols) / std::sqrt(static_cast<double>(fan_in));
}

}  // namespace distflow
