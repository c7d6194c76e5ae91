// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "distflow/common.hpp"

namespace distflow {

struct Parameter {
    Matrix value;
    bool frozen = false;
};

/// Named parameter tensors with per-tensor frozen flags. Iteration order is
/// the lexicographic name order, which fixes checkpoint and update order.
class ParamSet {
public:
    using Storage = std::map<std::string, Parameter>;

    Parameter& add(const std::string& name, Matrix value, bool frozen = false);
    bool contains(const std::string& name) const { return params_.count(name) != 0; }
    Parameter& at(const std::string& name);
    const Parameter& at(const std::string& name) const;

    void set_frozen(bool frozen);
    bool all_frozen() const;
    std::size_t size() const { return params_.size(); }
    Eigen::Index scalar_count() const;

    Storage::iterator begin() { return params_.begin(); }
    Storage::iterator end() { return params_.end(); }
    Storage::const_iterator begin() const { return params_.begin(); }
    Storage::const_iterator end() const { return params_.end(); }

    friend bool operator==(const ParamSet& a, const ParamSet& b);

private:
    Storage params_;
};

/// Weight matrix with entries drawn from N(0, 1/fan_in).
Matrix fan_in_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in);

}  // namespace distflow
