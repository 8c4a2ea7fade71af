/**
 * @file test_autodiff.cpp
 * @brief Tape operations, reverse-mode gradients and the Adam update.
 */
#include "stonet/adam.hpp"
#include "stonet/autodiff.hpp"
#include "stonet/error.hpp"
#include "stonet/layers.hpp"
#include "stonet/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace stonet;

namespace {

Matrix row(std::initializer_list<double> v)
{
    Matrix m(1, static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        m(0, i++) = x;
    return m;
}

} // namespace

TEST_SUITE("autodiff") {

TEST_CASE("elementwise, concat and mse forward values")
{
    Tape t;
    const Var a = t.constant(row({2, 3}));
    const Var b = t.constant(row({4, 5}));
    CHECK(t.value(t.mul(a, b)) == row({8, 15}));
    CHECK(t.value(t.add(a, b)) == row({6, 8}));
    CHECK(t.value(t.sub(a, b)) == row({-2, -2}));
    CHECK(t.value(t.mse(t.constant(row({1, 2})), t.constant(row({1, 2}))))(0, 0) == 0.0);
    const Var c = t.concat({t.constant(row({1, 2})), t.constant(row({3, 4, 5}))});
    CHECK(t.value(c).cols() == 5);
    CHECK(t.value(c)(0, 4) == 5.0);
    CHECK(t.value(t.row_sum(c))(0, 0) == 15.0);
}

TEST_CASE("row bias broadcasts over the batch")
{
    Tape t;
    Matrix x(3, 2);
    x << 1, 2, 3, 4, 5, 6;
    const Var s = t.add(t.constant(x), t.constant(row({10, 20})));
    CHECK(t.value(s)(2, 1) == 26.0);
}

TEST_CASE("shape mismatch names both shapes")
{
    Tape t;
    const Var a = t.constant(Matrix::Zero(2, 3));
    const Var b = t.constant(Matrix::Zero(2, 4));
    try {
        t.mul(a, b);
        FAIL("expected a shape error");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2x3") != std::string::npos);
        CHECK(msg.find("2x4") != std::string::npos);
    }
    CHECK_THROWS_AS(t.matmul(a, b), ShapeError);
}

TEST_CASE("backward requires a scalar loss")
{
    Tape t;
    const Var a = t.constant(row({1, 2}));
    CHECK_THROWS(t.backward(a));
}

TEST_CASE("mse of a linear map has the analytic gradient")
{
    CounterRng rng{3};
    Matrix wv(3, 2), xv(5, 3), yv(5, 2);
    for (auto* m : {&wv, &xv, &yv})
        for (Eigen::Index i = 0; i < m->size(); ++i)
            m->data()[i] = rng.uniform(-1, 1);
    Parameter w(wv, "w");
    Tape t;
    const Var loss = t.mse(t.matmul(t.constant(xv), t.param(w)), t.constant(yv));
    t.backward(loss);
    // d/dW mean((XW - Y)^2) = 2 X^T (XW - Y) / n
    const Matrix expected = 2.0 * xv.transpose() * (xv * wv - yv) / static_cast<double>(yv.size());
    CHECK((w.grad - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("tanh has unit slope at zero")
{
    Parameter p(Matrix::Zero(1, 1), "p");
    Tape t;
    const Var y = t.tanh(t.param(p));
    t.backward(t.row_sum(y));
    CHECK(p.grad(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("unreachable parameters keep a zero gradient")
{
    Parameter used(row({1, 2}), "used");
    Parameter unused(row({3, 4}), "unused");
    unused.grad.setConstant(0.0);
    Tape t;
    t.backward(t.mse(t.param(used), t.constant(row({0, 0}))));
    CHECK(used.grad.cwiseAbs().maxCoeff() > 0.0);
    CHECK(unused.grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dense layer gradients match central differences")
{
    std::uint64_t stream = 0;
    Mlp mlp(3, {4, 2}, {Activation::Tanh, Activation::Linear}, 5, stream, "m");
    std::vector<Parameter*> params;
    mlp.collect(params);
    CounterRng rng{8};
    Matrix x(6, 3), y(6, 2);
    for (auto* m : {&x, &y})
        for (Eigen::Index i = 0; i < m->size(); ++i)
            m->data()[i] = rng.uniform(-1, 1);
    auto loss = [&]() {
        Tape t;
        return t.value(t.mse(mlp.forward(t, t.constant(x)), t.constant(y)))(0, 0);
    };
    for (auto* p : params)
        p->zero_grad();
    Tape t;
    t.backward(t.mse(mlp.forward(t, t.constant(x)), t.constant(y)));
    for (auto* p : params) {
        for (Eigen::Index i = 0; i < p->value.size(); ++i) {
            const double keep = p->value.data()[i];
            const double h = 1e-6;
            p->value.data()[i] = keep + h;
            const double up = loss();
            p->value.data()[i] = keep - h;
            const double down = loss();
            p->value.data()[i] = keep;
            const double fd = (up - down) / (2 * h);
            CHECK(p->grad.data()[i] == doctest::Approx(fd).epsilon(1e-6).scale(1e-3));
        }
    }
}

TEST_CASE("two backward passes with zeroing give identical gradients")
{
    std::uint64_t stream = 0;
    Mlp mlp(2, {3, 1}, {Activation::Tanh, Activation::Linear}, 1, stream, "m");
    std::vector<Parameter*> params;
    mlp.collect(params);
    const Matrix x = Matrix::Constant(4, 2, 0.3);
    const Matrix y = Matrix::Constant(4, 1, -0.2);
    std::vector<Matrix> first;
    for (int pass = 0; pass < 2; ++pass) {
        for (auto* p : params)
            p->zero_grad();
        Tape t;
        t.backward(t.mse(mlp.forward(t, t.constant(x)), t.constant(y)));
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (pass == 0)
                first.push_back(params[i]->grad);
            else
                CHECK(params[i]->grad == first[i]);
        }
    }
}

TEST_CASE("glorot initialization is seeded and bounded")
{
    const DenseLayer a(10, 6, Activation::Tanh, 3, 0, "a");
    const DenseLayer b(10, 6, Activation::Tanh, 3, 0, "b");
    const DenseLayer c(10, 6, Activation::Tanh, 3, 1, "c");
    CHECK(a.weight().value == b.weight().value);
    CHECK(a.weight().value != c.weight().value);
    const double limit = std::sqrt(6.0 / 16.0);
    CHECK(a.weight().value.cwiseAbs().maxCoeff() <= limit);
    CHECK(a.bias().value.cwiseAbs().maxCoeff() == 0.0);
    CHECK(DenseLayer::parameter_count(10, 6) == 66);
}

TEST_CASE("Adam first step moves each element by lr")
{
    Parameter p(Matrix::Constant(2, 3, 0.5), "p");
    Adam opt({&p}, AdamConfig{});
    p.grad << 1.0, -2.0, 3.0, 0.25, -0.5, 7.0;
    const Matrix before = p.value;
    opt.step();
    const Matrix delta = (p.value - before).cwiseAbs();
    for (Eigen::Index i = 0; i < delta.size(); ++i)
        CHECK(delta.data()[i] == doctest::Approx(1e-3).epsilon(1e-7));
    CHECK(opt.step_count() == 1);
    CHECK(opt.first_moment()[0].rows() == 2);
    CHECK(opt.second_moment()[0].cols() == 3);
}

TEST_CASE("Adam leaves parameters unchanged under a zero gradient")
{
    Parameter p(Matrix::Constant(2, 2, 0.5), "p");
    Adam opt({&p});
    opt.step();
    CHECK(p.value == Matrix::Constant(2, 2, 0.5));
}

TEST_CASE("Adam rejects a non-finite gradient before mutating anything")
{
    Parameter a(Matrix::Constant(1, 2, 1.0), "a");
    Parameter b(Matrix::Constant(1, 2, 1.0), "b");
    Adam opt({&a, &b});
    a.grad.setConstant(1.0);
    b.grad(0, 1) = std::nan("");
    CHECK_THROWS_AS(opt.step(), TrainingError);
    CHECK(a.value == Matrix::Constant(1, 2, 1.0));
    CHECK(opt.step_count() == 0);
}

TEST_CASE("identical Adam runs give identical trajectories")
{
    auto run = []() {
        Parameter p(row({0.3, -0.7}), "p");
        Adam opt({&p}, AdamConfig{0.01});
        for (int i = 0; i < 50; ++i) {
            opt.zero_grad();
            Tape t;
            t.backward(t.mse(t.tanh(t.param(p)), t.constant(row({0.1, 0.2}))));
            opt.step();
        }
        return p.value;
    };
    CHECK(run() == run());
}

}
