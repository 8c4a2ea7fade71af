/**
 * @file test_operator.cpp
 * @brief DeepONet, En-DeepONet and STONet forward passes, parameter counts,
 *        structural equivalences, checkpoints and the Euler rollout.
 */
#include "stonet/checkpoint.hpp"
#include "stonet/error.hpp"
#include "stonet/operator_model.hpp"
#include "stonet/pipeline.hpp"
#include "stonet/rollout.hpp"
#include "stonet/verify/acceptance_checks.hpp"
#include "stonet/verify/oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <functional>
#include <map>

using namespace stonet;
namespace fs = std::filesystem;

namespace {

OperatorConfig tiny(Architecture arch, int width = 8)
{
    OperatorConfig c;
    c.arch = arch;
    c.width = width;
    c.branch_depth = 2;
    c.trunk_depth = 2;
    c.root_depth = 2;
    c.blocks = 2;
    c.seed = 17;
    return c;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    CounterRng rng{seed};
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = rng.uniform(-1.0, 1.0);
    return m;
}

long closed_form_count(const OperatorConfig& c)
{
    const long w = c.width;
    const long hidden = w * w + w;
    const long b = (c.branch_inputs * w + w) + (c.branch_depth - 1) * hidden;
    const long t = (c.trunk_inputs * w + w) + (c.trunk_depth - 1) * hidden;
    switch (c.arch) {
    case Architecture::DeepONet:
        return b + t + 1;
    case Architecture::EnDeepONet:
        return b + t + (3 * w * w + w) + (c.root_depth - 1) * hidden + (w + 1);
    case Architecture::STONet:
        return b + t + c.blocks * (3 * hidden + 3 * w * w + w) + c.root_depth * hidden + (w + 1);
    }
    return -1;
}

/// Structural description of the sub-graph rooted at `id`. `skip` decides
/// which Dense nodes are elided (together with their activation).
std::string signature(const Tape& tape, int id, const std::function<bool(const Tape&, int)>& skip)
{
    const auto& n = tape.nodes()[static_cast<std::size_t>(id)];
    if (n.kind == OpKind::Tanh) {
        const int d = n.inputs[0];
        if (tape.nodes()[static_cast<std::size_t>(d)].kind == OpKind::Dense && skip(tape, d))
            return signature(tape, tape.nodes()[static_cast<std::size_t>(d)].inputs[0], skip);
    }
    std::string s = std::string(op_name(n.kind)) + "[" + std::to_string(n.value.rows()) + "x" +
                    std::to_string(n.value.cols()) + "](";
    for (int in : n.inputs)
        s += signature(tape, in, skip) + ",";
    return s + ")";
}

struct StubModel : RateModel {
    double rate = 0.0;
    Eigen::VectorXd rates(const Eigen::MatrixXd& branch, const Eigen::MatrixXd&) const override
    {
        return Eigen::VectorXd::Constant(branch.rows(), rate);
    }
};

} // namespace

TEST_SUITE("operator") {

TEST_CASE("output has one column per query for every architecture")
{
    for (auto arch : {Architecture::DeepONet, Architecture::EnDeepONet, Architecture::STONet}) {
        OperatorModel m(tiny(arch));
        Tape t;
        const Var y = m.forward(t, t.constant(random_matrix(7, 4, 1)), t.constant(random_matrix(7, 3, 2)));
        CHECK(t.value(y).rows() == 7);
        CHECK(t.value(y).cols() == 1);
        CHECK(m.rates(random_matrix(7, 4, 1), random_matrix(7, 3, 2)).size() == 7);
    }
}

TEST_CASE("input dimension mismatches are rejected")
{
    OperatorModel m(tiny(Architecture::STONet));
    Tape t;
    CHECK_THROWS_AS(m.forward(t, t.constant(random_matrix(3, 5, 1)), t.constant(random_matrix(3, 3, 2))), ShapeError);
    CHECK_THROWS_AS(m.rates(random_matrix(3, 4, 1), random_matrix(4, 3, 2)), ShapeError);
}

TEST_CASE("forward is deterministic and equivariant to batch order")
{
    for (auto arch : {Architecture::DeepONet, Architecture::EnDeepONet, Architecture::STONet}) {
        const OperatorModel m(tiny(arch));
        const Eigen::MatrixXd b = random_matrix(6, 4, 3), x = random_matrix(6, 3, 4);
        const Eigen::VectorXd y = m.rates(b, x);
        CHECK(m.rates(b, x) == y);
        Eigen::MatrixXd bs = b, xs = x;
        bs.row(1).swap(bs.row(4));
        xs.row(1).swap(xs.row(4));
        const Eigen::VectorXd ys = m.rates(bs, xs);
        CHECK(ys[1] == y[4]);
        CHECK(ys[4] == y[1]);
        CHECK(ys[0] == y[0]);
    }
}

TEST_CASE("parameter count matches the closed form for the default configuration")
{
    OperatorConfig c;  // width 100, depths 8/8, root 2, 8 blocks
    for (auto arch : {Architecture::DeepONet, Architecture::EnDeepONet, Architecture::STONet}) {
        c.arch = arch;
        OperatorModel m(c);
        long enumerated = 0;
        for (const Parameter* p : std::as_const(m).parameters())
            enumerated += p->size();
        CHECK(enumerated == closed_form_count(c));
        CHECK(parameter_count(c) == closed_form_count(c));
        CHECK(m.parameter_count() == enumerated);
    }
}

TEST_CASE("parameter count increases strictly with width")
{
    for (auto arch : {Architecture::DeepONet, Architecture::EnDeepONet, Architecture::STONet}) {
        OperatorConfig a = tiny(arch, 50), b = tiny(arch, 100);
        CHECK(parameter_count(a) < parameter_count(b));
    }
}

TEST_CASE("STONet without blocks ignores the branch input")
{
    OperatorConfig c = tiny(Architecture::STONet);
    c.blocks = 0;
    const OperatorModel m(c);
    const Eigen::MatrixXd x = random_matrix(5, 3, 9);
    CHECK(m.rates(random_matrix(5, 4, 1), x) == m.rates(random_matrix(5, 4, 2), x));
    CHECK(parameter_count(c) == closed_form_count(c));
}

TEST_CASE("with a zero branch encoding the multiplicative stream is constant over the batch")
{
    OperatorModel m(tiny(Architecture::STONet));
    // Zeroing the last branch layer makes eps_B = tanh(0) = 0 exactly.
    for (Parameter* p : m.parameters())
        if (p->name.rfind("branch.1.", 0) == 0)
            p->value.setZero();
    Tape t;
    m.forward(t, t.constant(random_matrix(6, 4, 5)), t.constant(random_matrix(6, 3, 6)));
    int checked = 0;
    for (std::size_t i = 0; i < t.nodes().size(); ++i) {
        const auto& n = t.nodes()[i];
        if (n.kind != OpKind::Dense || t.nodes()[static_cast<std::size_t>(n.inputs[0])].kind != OpKind::Mul)
            continue;
        CHECK(t.nodes()[static_cast<std::size_t>(n.inputs[0])].value.cwiseAbs().maxCoeff() == 0.0);
        const Matrix& s = t.nodes()[i + 1].value;  // activation of the stream layer
        for (Eigen::Index r = 1; r < s.rows(); ++r)
            CHECK(s.row(r) == s.row(0));
        ++checked;
    }
    CHECK(checked == 2);
}

TEST_CASE("En-DeepONet with a silenced root is constant")
{
    OperatorModel m(tiny(Architecture::EnDeepONet));
    for (Parameter* p : m.parameters())
        if (p->name.rfind("root.", 0) == 0 && p->name.rfind("root.0.", 0) != 0 && p->name.find("weight") != std::string::npos)
            p->value.setZero();
    const Eigen::VectorXd y = m.rates(random_matrix(8, 4, 1), random_matrix(8, 3, 2));
    CHECK((y.array() - y[0]).abs().maxCoeff() == 0.0);
}

TEST_CASE("literal-chain STONet with one block is En-DeepONet plus per-stream layers")
{
    OperatorConfig s = tiny(Architecture::STONet);
    s.blocks = 1;
    s.residual = false;
    s.fusion = Fusion::LiteralChain;
    s.root_depth = 1;
    OperatorConfig e = tiny(Architecture::EnDeepONet);
    e.root_depth = 2;

    OperatorModel ms(s), me(e);
    Tape ts, te;
    const Var ys = ms.forward(ts, ts.constant(random_matrix(3, 4, 1)), ts.constant(random_matrix(3, 3, 2)));
    const Var ye = me.forward(te, te.constant(random_matrix(3, 4, 1)), te.constant(random_matrix(3, 3, 2)));

    auto stream_layer = [](const Tape& t, int dense) {
        const auto k = t.nodes()[static_cast<std::size_t>(t.nodes()[static_cast<std::size_t>(dense)].inputs[0])].kind;
        return k == OpKind::Mul || k == OpKind::Add || k == OpKind::Sub;
    };
    auto keep_all = [](const Tape&, int) { return false; };
    CHECK(signature(ts, ys.id, stream_layer) == signature(te, ye.id, keep_all));
    CHECK(signature(ts, ys.id, keep_all) != signature(te, ye.id, keep_all));
}

TEST_CASE("gradients match finite differences for every architecture")
{
    for (auto arch : {Architecture::DeepONet, Architecture::EnDeepONet, Architecture::STONet}) {
        const auto g = verify::gradient_check(tiny(arch), 30, 5);
        CHECK(g.checked == 30);
        CHECK(g.max_relative_error < 1e-6);
    }
    OperatorConfig chain = tiny(Architecture::STONet);
    chain.fusion = Fusion::LiteralChain;
    chain.residual = false;
    chain.branch_minus_state = false;
    CHECK(verify::gradient_check(chain, 30, 6).max_relative_error < 1e-6);
}

TEST_CASE("two-step rollout loss gradient matches finite differences")
{
    OperatorModel m(tiny(Architecture::STONet));
    const Eigen::MatrixXd u = random_matrix(5, 4, 11);
    Eigen::MatrixXd x1 = random_matrix(5, 3, 12), x2 = x1;
    x1.col(2).setConstant(4.0);
    x2.col(2).setConstant(8.0);
    const Eigen::MatrixXd c0 = random_matrix(5, 1, 13).cwiseAbs();
    const Eigen::MatrixXd target = random_matrix(5, 1, 14).cwiseAbs();
    const double dt = 4.0;
    auto build = [&](Tape& t) {
        Var c = t.constant(c0);
        for (const auto* x : {&x1, &x2})
            c = t.add(c, t.affine(m.forward(t, t.constant(u), t.constant(*x)), dt, 0.0));
        return t.mse(c, t.constant(target));
    };
    m.zero_grad();
    Tape t;
    t.backward(build(t));
    double worst = 0.0;
    CounterRng pick{21};
    for (int s = 0; s < 40; ++s) {
        Parameter* p = m.parameters()[pick.below(m.parameters().size())];
        const auto i = static_cast<Eigen::Index>(pick.below(static_cast<std::uint64_t>(p->size())));
        const double keep = p->value.data()[i];
        const double h = 1e-6;
        p->value.data()[i] = keep + h;
        Tape a;
        const double up = a.value(build(a))(0, 0);
        p->value.data()[i] = keep - h;
        Tape b;
        const double down = b.value(build(b))(0, 0);
        p->value.data()[i] = keep;
        const double fd = (up - down) / (2 * h);
        const double g = p->grad.data()[i];
        const double scale = std::max({std::abs(g), std::abs(fd), 1e-8});
        worst = std::max(worst, std::abs(g - fd) / scale);
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("rollout arithmetic")
{
    const Grid grid(4, 3);
    const auto branch = [&](std::size_t) { return Eigen::MatrixXd::Zero(grid.node_count(), 4); };
    const Eigen::VectorXd c0 = Eigen::VectorXd::Constant(grid.node_count(), 0.5);
    StubModel zero;
    const RolloutResult r0 = rollout(zero, c0, branch, grid, {0.0, 4.0, 8.0});
    REQUIRE(r0.c.size() == 3u);
    CHECK(r0.c[2] == c0);

    StubModel slow;
    slow.rate = 0.01;
    const RolloutResult r1 = rollout(slow, c0, branch, grid, {0.0, 4.0});
    CHECK(r1.c[1][0] == doctest::Approx(0.54));
    CHECK(r1.out_of_range == 0);

    CHECK_THROWS(rollout(zero, c0, branch, grid, {0.0, 4.0, 9.0}));
}

TEST_CASE("true rates telescope back to the simulated snapshots")
{
    const fs::path dir = fs::temp_directory_path() / "stonet_unit_rollout";
    fs::remove_all(dir);
    const auto dirs = simulate_batch(dir, 4, 0, 1, Grid(14, 10), SolverConfig{}, 1);
    const StoredSimulation sim = read_simulation(dirs.front(), false);
    const verify::TrueRateModel oracle(sim);
    const RolloutResult r =
        rollout(oracle, sim.series.c.front(), node_branch_features(sim, false), sim.grid, sim.series.times_h);
    for (std::size_t k = 0; k < r.c.size(); ++k)
        CHECK((r.c[k] - sim.series.c[k]).cwiseAbs().maxCoeff() <= 1e-12);
    fs::remove_all(dir);
}

TEST_CASE("checkpoint round trip preserves predictions")
{
    NormalizationStats stats;
    stats.branch_mean = Eigen::VectorXd::Constant(4, 0.1);
    stats.branch_std = Eigen::VectorXd::Constant(4, 2.0);
    stats.trunk_mean = Eigen::VectorXd::Constant(3, -0.3);
    stats.trunk_std = Eigen::VectorXd::Constant(3, 0.5);
    stats.target_mean = 0.01;
    stats.target_std = 0.2;
    const OperatorModel m(tiny(Architecture::STONet), stats);
    const fs::path dir = fs::temp_directory_path() / "stonet_unit_ckpt";
    fs::remove_all(dir);
    save_checkpoint(dir, m);
    const OperatorModel back = load_checkpoint(dir);
    const Eigen::MatrixXd b = random_matrix(9, 4, 1), x = random_matrix(9, 3, 2);
    CHECK(back.rates(b, x) == m.rates(b, x));
    CHECK(back.flat_parameters() == m.flat_parameters());
    CHECK(fs::file_size(dir / "weights.bin") == 8u * static_cast<std::uintmax_t>(m.parameter_count()));

    Json meta = read_json(dir / "model.json");
    meta["config"]["width"] = 9;
    write_json(dir / "model.json", meta);
    CHECK_THROWS(load_checkpoint(dir));
    fs::remove_all(dir);
}

TEST_CASE("configuration validation and names")
{
    OperatorConfig c;
    c.width = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(parse_architecture("endeeponet") == Architecture::EnDeepONet);
    CHECK(parse_fusion("literal-chain") == Fusion::LiteralChain);
    CHECK_THROWS(parse_architecture("fno"));
    Json j = tiny(Architecture::STONet).to_json();
    CHECK(OperatorConfig::from_json(j).to_json() == j);
    j["heads"] = 4;
    CHECK_THROWS_AS(OperatorConfig::from_json(j), ConfigError);
}

}
