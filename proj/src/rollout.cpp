#include "stonet/rollout.hpp"

#include "stonet/dataset.hpp"
#include "stonet/error.hpp"
#include "stonet/fem.hpp"

#include <cmath>
#include <memory>

namespace stonet {

Eigen::MatrixXd node_trunk_features(const Grid& grid, double t_h)
{
    Eigen::MatrixXd trunk(grid.node_count(), kTrunkDim);
    for (int n = 0; n < grid.node_count(); ++n) {
        const Point2 p = grid.node_point(n);
        trunk(n, 0) = p.x;
        trunk(n, 1) = p.y;
        trunk(n, 2) = t_h;
    }
    return trunk;
}

BranchProvider node_branch_features(const StoredSimulation& sim, bool with_velocity)
{
    const int nb = branch_dim(with_velocity);
    auto base = std::make_shared<Eigen::MatrixXd>(sim.grid.node_count(), nb);
    base->leftCols(3) = nodal_permeability(sim.permeability, sim.grid);
    base->col(3).setConstant(sim.params.delta_p());
    if (!with_velocity)
        return [base](std::size_t) { return *base; };

    if (sim.series.v.size() != sim.series.size())
        throw Error("node_branch_features: velocity snapshots are missing");
    auto velocities = std::make_shared<std::vector<Eigen::MatrixXd>>();
    for (const auto& v : sim.series.v) {
        Eigen::MatrixXd per_point(sim.grid.quad_count(), 2);
        for (int q = 0; q < sim.grid.quad_count(); ++q) {
            per_point(q, 0) = v[2 * q];
            per_point(q, 1) = v[2 * q + 1];
        }
        velocities->push_back(quadrature_to_nodes(sim.grid, per_point));
    }
    return [base, velocities](std::size_t k) {
        if (k == 0 || k > velocities->size())
            throw Error("node_branch_features: step index out of range");
        Eigen::MatrixXd out = *base;
        out.rightCols(2) = (*velocities)[k - 1];
        return out;
    };
}

RolloutResult rollout(const RateModel& model, const Eigen::VectorXd& c0, const BranchProvider& branch,
                      const Grid& grid, const std::vector<double>& times_h)
{
    if (c0.size() != grid.node_count())
        throw ShapeError("rollout: initial field has " + std::to_string(c0.size()) + " values, grid has " +
                         std::to_string(grid.node_count()) + " nodes");
    if (times_h.empty())
        throw Error("rollout: no times");
    if (times_h.size() > 2) {
        const double dt = times_h[1] - times_h[0];
        for (std::size_t k = 2; k < times_h.size(); ++k)
            if (std::abs((times_h[k] - times_h[k - 1]) - dt) > 1e-9 * std::abs(dt))
                throw Error("rollout: snapshot times must be uniformly spaced");
    }

    RolloutResult out;
    out.times_h = times_h;
    out.c.push_back(c0);
    out.c_min = c0.minCoeff();
    out.c_max = c0.maxCoeff();
    for (std::size_t k = 1; k < times_h.size(); ++k) {
        const double dt = times_h[k] - times_h[k - 1];
        const Eigen::VectorXd rate = model.rates(branch(k), node_trunk_features(grid, times_h[k]));
        Eigen::VectorXd next = out.c.back() + dt * rate;
        out.c_min = std::min(out.c_min, next.minCoeff());
        out.c_max = std::max(out.c_max, next.maxCoeff());
        out.out_of_range += static_cast<long>(((next.array() < 0.0) || (next.array() > 1.0)).count());
        out.c.push_back(std::move(next));
    }
    return out;
}

} // namespace stonet
