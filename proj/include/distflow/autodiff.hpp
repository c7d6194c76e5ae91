// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

// Tape-based reverse-mode differentiation over dense Eigen matrices.
//
// A Tape owns every node created during one forward pass. Nodes are appended
// in evaluation order, so reverse creation order is a valid topological order
// for the backward sweep. Nodes that depend on no tracked leaf carry no
// backward closure and receive no gradient.

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "distflow/common.hpp"

namespace distflow {

struct Parameter;

using Gradients = std::map<std::string, Matrix>;

namespace ad {

class Tape;

class Var {
public:
    Var() = default;

    const Matrix& value() const;
    bool requires_grad() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
    Tape* tape() const { return tape_; }
    int id() const { return id_; }

private:
    friend class Tape;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    int id_ = -1;
};

class Tape {
public:
    // Receives the node's output gradient and the tape; pushes contributions
    // into inputs through accumulate().
    using BackwardFn = std::function<void(Tape&, const Matrix& grad_out)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix value);
    /// Tracked input leaf; its gradient is available through grad() after backward().
    Var leaf(Matrix value);
    /// Parameter leaf. Frozen parameters (or detach == true) become constants
    /// that reference the parameter storage without copying.
    Var parameter(const std::string& name, const Parameter& param, bool detach = false);

    Var record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward);

    /// Runs the reverse sweep from a 1x1 loss. Returns gradients for every
    /// tracked parameter leaf on this tape (zero when unreachable).
    Gradients backward(Var loss);

    const Matrix& value(int id) const;
    bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
    /// Gradient of a tracked node after backward(); zero matrix if none arrived.
    Matrix grad(Var v) const;

    void accumulate(Var target, const Matrix& contribution);
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        const Matrix* external = nullptr;
        Matrix grad;
        bool requires_grad = false;
        BackwardFn backward;
        std::string param_name;
    };

    Var push(Node node);

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

// Linear algebra.
Var matmul(Var a, Var b);
/// a * b^T, the shape of a linear layer applied to row-stacked samples.
Var matmul_transposed(Var a, Var b);

// Elementwise.
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var cwise_product(Var a, Var b);
Var scale(Var a, double factor);
Var square(Var a);
Var silu(Var a);

/// a + row, where row (1 x cols) is broadcast down every row of a.
Var add_row(Var a, Var row);

// Reductions to 1x1.
Var sum(Var a);
Var mean(Var a);

/// Builds a rows x cols matrix whose column-major entry k is
/// a.data()[index[k]], or 0 where index[k] < 0.
Var gather(Var a, Eigen::Index rows, Eigen::Index cols, std::vector<int> index);

}  // namespace ad
}  // namespace distflow
