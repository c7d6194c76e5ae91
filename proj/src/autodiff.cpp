// Copyright (C) 2026 The distflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "distflow/autodiff.hpp"

#include "distflow/params.hpp"

namespace distflow::ad {

const Matrix& Var::value() const {
    require(tape_ != nullptr, "use of an empty Var");
    return tape_->value(id_);
}

bool Var::requires_grad() const {
    require(tape_ != nullptr, "use of an empty Var");
    return tape_->requires_grad(id_);
}

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::leaf(Matrix value) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = true;
    return push(std::move(n));
}

Var Tape::parameter(const std::string& name, const Parameter& param, bool detach) {
    Node n;
    n.external = &param.value;
    n.requires_grad = !(param.frozen || detach);
    if (n.requires_grad) {
        n.param_name = name;
    }
    return push(std::move(n));
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward) {
    Node n;
    n.value = std::move(value);
    for (const Var& v : inputs) {
        require(v.tape() == this, "Var belongs to a different tape");
        n.requires_grad = n.requires_grad || requires_grad(v.id());
    }
    if (n.requires_grad) {
        n.backward = std::move(backward);
    }
    return push(std::move(n));
}

const Matrix& Tape::value(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.external != nullptr ? *n.external : n.value;
}

Matrix Tape::grad(Var v) const {
    const Node& n = nodes_[static_cast<std::size_t>(v.id())];
    if (n.grad.size() == 0) {
        const Matrix& val = value(v.id());
        return Matrix::Zero(val.rows(), val.cols());
    }
    return n.grad;
}

void Tape::accumulate(Var target, const Matrix& contribution) {
    Node& n = nodes_[static_cast<std::size_t>(target.id())];
    if (!n.requires_grad) {
        return;
    }
    if (n.grad.size() == 0) {
        n.grad = contribution;
    } else {
        n.grad += contribution;
    }
}

Gradients Tape::backward(Var loss) {
    require(loss.tape() == this, "loss belongs to a different tape");
    require(loss.rows() == 1 && loss.cols() == 1, "backward: loss must be a scalar, got ", loss.rows(), "x",
            loss.cols());
    require(!backward_done_, "backward: already ran on this tape");
    backward_done_ = true;

    if (requires_grad(loss.id())) {
        nodes_[static_cast<std::size_t>(loss.id())].grad = Matrix::Ones(1, 1);
        for (int id = loss.id(); id >= 0; --id) {
            Node& n = nodes_[static_cast<std::size_t>(id)];
            if (!n.backward || n.grad.size() == 0) {
                continue;
            }
            n.backward(*this, n.grad);
        }
    }

    Gradients grads;
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        const Node& n = nodes_[id];
        if (n.param_name.empty()) {
            continue;
        }
        Matrix g = grad(Var(this, static_cast<int>(id)));
        auto it = grads.find(n.param_name);
        if (it == grads.end()) {
            grads.emplace(n.param_name, std::move(g));
        } else {
            it->second += g;
        }
    }
    return grads;
}

namespace {

Tape& tape_of(Var a, Var b) {
    require(a.tape() != nullptr && a.tape() == b.tape(), "operands belong to different tapes");
    return *a.tape();
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Var matmul(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    require(a.cols() == b.rows(), "matmul: ", a.rows(), "x", a.cols(), " * ", b.rows(), "x", b.cols());
    return tape.record(a.value() * b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
        if (a.requires_grad()) t.accumulate(a, g * b.value().transpose());
        if (b.requires_grad()) t.accumulate(b, a.value().transpose() * g);
    });
}

Var matmul_transposed(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    require(a.cols() == b.cols(), "matmul_transposed: ", a.rows(), "x", a.cols(), " * (", b.rows(), "x",
            b.cols(), ")^T");
    return tape.record(a.value() * b.value().transpose(), {a, b}, [a, b](Tape& t, const Matrix& g) {
        if (a.requires_grad()) t.accumulate(a, g * b.value());
        if (b.requires_grad()) t.accumulate(b, g.transpose() * a.value());
    });
}

Var operator+(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    require_same_shape(a.value(), b.value(), "add");
    return tape.record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

Var operator-(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    require_same_shape(a.value(), b.value(), "sub");
    return tape.record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
        t.accumulate(a, g);
        t.accumulate(b, -g);
    });
}

Var cwise_product(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    require_same_shape(a.value(), b.value(), "cwise_product");
    return tape.record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, const Matrix& g) {
        if (a.requires_grad()) t.accumulate(a, g.cwiseProduct(b.value()));
        if (b.requires_grad()) t.accumulate(b, g.cwiseProduct(a.value()));
    });
}

Var scale(Var a, double factor) {
    return a.tape()->record(a.value() * factor, {a},
                            [a, factor](Tape& t, const Matrix& g) { t.accumulate(a, g * factor); });
}

Var square(Var a) {
    return a.tape()->record(a.value().array().square().matrix(), {a}, [a](Tape& t, const Matrix& g) {
        t.accumulate(a, 2.0 * g.cwiseProduct(a.value()));
    });
}

Var silu(Var a) {
    Matrix out = a.value().unaryExpr([](double x) { return x * sigmoid(x); });
    return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
        Matrix d = a.value().unaryExpr([](double x) {
            double s = sigmoid(x);
            return s * (1.0 + x * (1.0 - s));
        });
        t.accumulate(a, g.cwiseProduct(d));
    });
}

Var add_row(Var a, Var row) {
    Tape& tape = tape_of(a, row);
    require(row.rows() == 1 && row.cols() == a.cols(), "add_row: row is ", row.rows(), "x", row.cols(),
            ", matrix has ", a.cols(), " columns");
    Matrix out = a.value().rowwise() + row.value().row(0);
    return tape.record(std::move(out), {a, row}, [a, row](Tape& t, const Matrix& g) {
        t.accumulate(a, g);
        if (row.requires_grad()) t.accumulate(row, g.colwise().sum());
    });
}

Var sum(Var a) {
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
        t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
    });
}

Var mean(Var a) {
    require(a.value().size() > 0, "mean of an empty matrix");
    const double n = static_cast<double>(a.value().size());
    Matrix out(1, 1);
    out(0, 0) = a.value().sum() / n;
    return a.tape()->record(std::move(out), {a}, [a, n](Tape& t, const Matrix& g) {
        t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0) / n));
    });
}

Var gather(Var a, Eigen::Index rows, Eigen::Index cols, std::vector<int> index) {
    require(static_cast<Eigen::Index>(index.size()) == rows * cols, "gather: index has ", index.size(),
            " entries for a ", rows, "x", cols, " result");
    const Matrix& src = a.value();
    Matrix out(rows, cols);
    for (std::size_t k = 0; k < index.size(); ++k) {
        const int i = index[k];
        require(i < src.size(), "gather: index ", i, " out of range");
        out.data()[k] = i < 0 ? 0.0 : src.data()[i];
    }
    return a.tape()->record(std::move(out), {a}, [a, index = std::move(index)](Tape& t, const Matrix& g) {
        Matrix back = Matrix::Zero(a.rows(), a.cols());
        for (std::size_t k = 0; k < index.size(); ++k) {
            if (index[k] >= 0) {
                back.data()[index[k]] += g.data()[k];
            }
        }
        t.accumulate(a, back);
    });
}

}  // namespace distflow::ad
