#include "stonet/autodiff.hpp"

#include "stonet/error.hpp"

namespace stonet {

const char* op_name(OpKind kind)
{
    switch (kind) {
    case OpKind::Constant: return "constant";
    case OpKind::Param: return "param";
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Tanh: return "tanh";
    case OpKind::Concat: return "concat";
    case OpKind::Affine: return "affine";
    case OpKind::RowSum: return "row_sum";
    case OpKind::Dense: return "dense";
    case OpKind::Mse: return "mse";
    }
    return "?";
}

std::string Tape::shape(const Matrix& m)
{
    return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

const Tape::Node& Tape::node(Var v) const
{
    if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
        throw Error("tape: invalid variable handle");
    return nodes_[static_cast<std::size_t>(v.id)];
}

Var Tape::push(Node n)
{
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Matrix value)
{
    Node n{OpKind::Constant, {}, nullptr, std::move(value), {}, 1.0, 0.0, false};
    return push(std::move(n));
}

Var Tape::param(Parameter& p)
{
    Node n{OpKind::Param, {}, &p, p.value, {}, 1.0, 0.0, true};
    return push(std::move(n));
}

Var Tape::matmul(Var a, Var b)
{
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.value.cols() != nb.value.rows())
        throw ShapeError("matmul: shapes " + shape(na.value) + " and " + shape(nb.value) + " are incompatible");
    Node n{OpKind::MatMul, {a.id, b.id}, nullptr, na.value * nb.value, {}, 1.0, 0.0,
           na.needs_grad || nb.needs_grad};
    return push(std::move(n));
}

namespace {

bool broadcast_row(const Matrix& a, const Matrix& b) { return b.rows() == 1 && a.rows() != 1 && a.cols() == b.cols(); }

} // namespace

Var Tape::add(Var a, Var b)
{
    const Node& na = node(a);
    const Node& nb = node(b);
    Matrix out;
    if (na.value.rows() == nb.value.rows() && na.value.cols() == nb.value.cols())
        out = na.value + nb.value;
    else if (broadcast_row(na.value, nb.value))
        out = na.value.rowwise() + nb.value.row(0);
    else
        throw ShapeError("add: shapes " + shape(na.value) + " and " + shape(nb.value) + " are incompatible");
    Node n{OpKind::Add, {a.id, b.id}, nullptr, std::move(out), {}, 1.0, 0.0, na.needs_grad || nb.needs_grad};
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b)
{
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols())
        throw ShapeError("sub: shapes " + shape(na.value) + " and " + shape(nb.value) + " differ");
    Node n{OpKind::Sub, {a.id, b.id}, nullptr, na.value - nb.value, {}, 1.0, 0.0, na.needs_grad || nb.needs_grad};
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b)
{
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols())
        throw ShapeError("mul: shapes " + shape(na.value) + " and " + shape(nb.value) + " differ");
    Node n{OpKind::Mul, {a.id, b.id}, nullptr, na.value.cwiseProduct(nb.value), {}, 1.0, 0.0,
           na.needs_grad || nb.needs_grad};
    return push(std::move(n));
}

Var Tape::tanh(Var a)
{
    const Node& na = node(a);
    Node n{OpKind::Tanh, {a.id}, nullptr, na.value.array().tanh().matrix(), {}, 1.0, 0.0, na.needs_grad};
    return push(std::move(n));
}

Var Tape::concat(const std::vector<Var>& parts)
{
    if (parts.empty())
        throw ShapeError("concat: no inputs");
    const Eigen::Index rows = node(parts.front()).value.rows();
    Eigen::Index cols = 0;
    bool grad = false;
    std::vector<int> ids;
    for (Var p : parts) {
        const Node& np = node(p);
        if (np.value.rows() != rows)
            throw ShapeError("concat: shapes " + shape(node(parts.front()).value) + " and " + shape(np.value) +
                             " have different batch sizes");
        cols += np.value.cols();
        grad = grad || np.needs_grad;
        ids.push_back(p.id);
    }
    Matrix out(rows, cols);
    Eigen::Index c = 0;
    for (Var p : parts) {
        const Matrix& v = node(p).value;
        out.middleCols(c, v.cols()) = v;
        c += v.cols();
    }
    Node n{OpKind::Concat, std::move(ids), nullptr, std::move(out), {}, 1.0, 0.0, grad};
    return push(std::move(n));
}

Var Tape::affine(Var a, double scale, double shift)
{
    const Node& na = node(a);
    Node n{OpKind::Affine, {a.id}, nullptr, (scale * na.value.array() + shift).matrix(), {}, scale, shift,
           na.needs_grad};
    return push(std::move(n));
}

Var Tape::row_sum(Var a)
{
    const Node& na = node(a);
    Node n{OpKind::RowSum, {a.id}, nullptr, na.value.rowwise().sum(), {}, 1.0, 0.0, na.needs_grad};
    return push(std::move(n));
}

Var Tape::dense(Var a, Parameter& weight, Parameter& bias)
{
    const Var w = param(weight);
    const Var b = param(bias);
    const Node& na = node(a);
    if (na.value.cols() != weight.value.rows())
        throw ShapeError("dense: input " + shape(na.value) + " does not match weight " + shape(weight.value));
    if (bias.value.rows() != 1 || bias.value.cols() != weight.value.cols())
        throw ShapeError("dense: bias " + shape(bias.value) + " does not match weight " + shape(weight.value));
    Matrix out = na.value * weight.value;
    out.rowwise() += bias.value.row(0);
    Node n{OpKind::Dense, {a.id, w.id, b.id}, nullptr, std::move(out), {}, 1.0, 0.0, true};
    return push(std::move(n));
}

Var Tape::mse(Var prediction, Var target)
{
    const Node& np = node(prediction);
    const Node& nt = node(target);
    if (np.value.rows() != nt.value.rows() || np.value.cols() != nt.value.cols())
        throw ShapeError("mse: shapes " + shape(np.value) + " and " + shape(nt.value) + " differ");
    if (np.value.size() == 0)
        throw ShapeError("mse: empty input");
    Matrix out(1, 1);
    out(0, 0) = (np.value - nt.value).squaredNorm() / static_cast<double>(np.value.size());
    Node n{OpKind::Mse, {prediction.id, target.id}, nullptr, std::move(out), {}, 1.0, 0.0,
           np.needs_grad || nt.needs_grad};
    return push(std::move(n));
}

Matrix Tape::gradient(Var v) const
{
    const Node& n = node(v);
    if (n.grad.size() == 0)
        return Matrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
}

void Tape::backward(Var loss)
{
    const Node& nl = node(loss);
    if (nl.value.rows() != 1 || nl.value.cols() != 1)
        throw ShapeError("backward: loss must be 1x1, got " + shape(nl.value));

    for (auto& n : nodes_)
        n.grad.resize(0, 0);
    nodes_[static_cast<std::size_t>(loss.id)].grad = Matrix::Ones(1, 1);

    auto accumulate = [this](int id, const auto& g) {
        Node& t = nodes_[static_cast<std::size_t>(id)];
        if (!t.needs_grad)
            return;
        if (t.grad.size() == 0)
            t.grad = g;
        else
            t.grad += g;
    };

    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.needs_grad || n.grad.size() == 0)
            continue;
        const Matrix& g = n.grad;
        switch (n.kind) {
        case OpKind::Constant:
            break;
        case OpKind::Param:
            n.param->grad += g;
            break;
        case OpKind::MatMul: {
            const Matrix& a = nodes_[static_cast<std::size_t>(n.inputs[0])].value;
            const Matrix& b = nodes_[static_cast<std::size_t>(n.inputs[1])].value;
            accumulate(n.inputs[0], (g * b.transpose()).eval());
            accumulate(n.inputs[1], (a.transpose() * g).eval());
            break;
        }
        case OpKind::Add: {
            accumulate(n.inputs[0], g);
            const Matrix& b = nodes_[static_cast<std::size_t>(n.inputs[1])].value;
            if (b.rows() == g.rows())
                accumulate(n.inputs[1], g);
            else
                accumulate(n.inputs[1], g.colwise().sum().eval());
            break;
        }
        case OpKind::Sub:
            accumulate(n.inputs[0], g);
            accumulate(n.inputs[1], (-g).eval());
            break;
        case OpKind::Mul: {
            const Matrix& a = nodes_[static_cast<std::size_t>(n.inputs[0])].value;
            const Matrix& b = nodes_[static_cast<std::size_t>(n.inputs[1])].value;
            accumulate(n.inputs[0], g.cwiseProduct(b).eval());
            accumulate(n.inputs[1], g.cwiseProduct(a).eval());
            break;
        }
        case OpKind::Tanh:
            accumulate(n.inputs[0], (g.array() * (1.0 - n.value.array().square())).matrix().eval());
            break;
        case OpKind::Concat: {
            Eigen::Index c = 0;
            for (int in : n.inputs) {
                const Eigen::Index w = nodes_[static_cast<std::size_t>(in)].value.cols();
                accumulate(in, g.middleCols(c, w).eval());
                c += w;
            }
            break;
        }
        case OpKind::Affine:
            accumulate(n.inputs[0], (n.scale * g).eval());
            break;
        case OpKind::RowSum: {
            const Matrix& a = nodes_[static_cast<std::size_t>(n.inputs[0])].value;
            accumulate(n.inputs[0], g.replicate(1, a.cols()).eval());
            break;
        }
        case OpKind::Dense: {
            const Matrix& a = nodes_[static_cast<std::size_t>(n.inputs[0])].value;
            const Matrix& w = nodes_[static_cast<std::size_t>(n.inputs[1])].value;
            accumulate(n.inputs[0], (g * w.transpose()).eval());
            accumulate(n.inputs[1], (a.transpose() * g).eval());
            accumulate(n.inputs[2], g.colwise().sum().eval());
            break;
        }
        case OpKind::Mse: {
            const Matrix& p = nodes_[static_cast<std::size_t>(n.inputs[0])].value;
            const Matrix& t = nodes_[static_cast<std::size_t>(n.inputs[1])].value;
            const Matrix d = (2.0 * g(0, 0) / static_cast<double>(p.size())) * (p - t);
            accumulate(n.inputs[0], d);
            accumulate(n.inputs[1], (-d).eval());
            break;
        }
        }
    }
}

} // namespace stonet
