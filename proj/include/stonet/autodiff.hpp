/**
 * @file autodiff.hpp
 * @brief Reverse-mode differentiation over dense batch x feature matrices.
 *
 * A Tape records operations in execution order, which is a topological order
 * of the expression graph. `backward` walks the tape once in reverse and
 * accumulates into the `grad` of every Parameter reachable from the loss.
 * Parameters are owned by the model; the tape only refers to them.
 */
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace stonet {

using Matrix = Eigen::MatrixXd;

/// Trainable tensor with its gradient slot (same shape).
struct Parameter {
    Matrix value;
    Matrix grad;
    std::string name;

    Parameter() = default;
    Parameter(Matrix v, std::string n) : value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())), name(std::move(n)) {}

    void zero_grad() { grad.setZero(value.rows(), value.cols()); }
    Eigen::Index size() const { return value.size(); }
};

enum class OpKind {
    Constant,
    Param,
    MatMul,
    Add,       // equal shapes, or a 1 x n row broadcast over the batch
    Sub,
    Mul,
    Tanh,
    Concat,    // along the feature axis
    Affine,    // scale * a + shift
    RowSum,    // batch x n -> batch x 1
    Dense,     // a * W + b
    Mse,       // mean over all entries of (a - b)^2, 1 x 1
};

const char* op_name(OpKind kind);

/// Handle to a tape node.
struct Var {
    int id = -1;
};

class Tape {
public:
    struct Node {
        OpKind kind;
        std::vector<int> inputs;
        Parameter* param = nullptr;  // Param nodes; Dense keeps weight/bias in inputs
        Matrix value;
        Matrix grad;
        double scale = 1.0;
        double shift = 0.0;
        bool needs_grad = false;
    };

    Var constant(Matrix value);
    Var param(Parameter& p);

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var tanh(Var a);
    Var concat(const std::vector<Var>& parts);
    Var affine(Var a, double scale, double shift);
    Var row_sum(Var a);
    /// a * weight + bias with bias a 1 x out row.
    Var dense(Var a, Parameter& weight, Parameter& bias);
    Var mse(Var prediction, Var target);

    const Matrix& value(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).value; }
    /// Gradient of the last backward pass with respect to node `v` (zero when unreachable).
    Matrix gradient(Var v) const;

    /// Requires a 1 x 1 loss. Parameter gradients are accumulated, not overwritten.
    void backward(Var loss);

    const std::vector<Node>& nodes() const { return nodes_; }
    void clear() { nodes_.clear(); }
    std::size_t size() const { return nodes_.size(); }

private:
    Var push(Node node);
    const Node& node(Var v) const;
    static std::string shape(const Matrix& m);

    std::vector<Node> nodes_;
};

} // namespace stonet
