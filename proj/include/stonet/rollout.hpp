/**
 * @file rollout.hpp
 * @brief Auto-regressive forward-Euler advance of nodal concentration.
 *
 * c(t_k) = c(t_{k-1}) + G(u)(x, y, t_k) * (t_k - t_{k-1}); the rate that
 * advances into t_k is queried at trunk time t_k, matching the backward
 * difference used for training targets.
 */
#pragma once

#include "stonet/grid.hpp"
#include "stonet/operator_model.hpp"
#include "stonet/snapshot_store.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace stonet {

struct RolloutResult {
    std::vector<Eigen::VectorXd> c;   // one per time, c[0] = c0
    std::vector<double> times_h;
    double c_min = 0.0;
    double c_max = 0.0;
    /// Nodal values outside [0, 1] summed over all predicted snapshots.
    long out_of_range = 0;
};

/// Branch features (nodes x nb) for step k, i.e. the advance from t_{k-1} to t_k.
using BranchProvider = std::function<Eigen::MatrixXd(std::size_t k)>;

/// Times must be uniformly spaced (relative tolerance 1e-9). No clipping is applied.
RolloutResult rollout(const RateModel& model, const Eigen::VectorXd& c0, const BranchProvider& branch,
                      const Grid& grid, const std::vector<double>& times_h);

/// Branch features of every node for a stored simulation: (kxx, kyy, kxy, dp)
/// and, when `with_velocity` is set, the simulated nodal velocity at t_{k-1}.
BranchProvider node_branch_features(const StoredSimulation& sim, bool with_velocity);

/// Trunk rows (x, y, t) of every node at time t.
Eigen::MatrixXd node_trunk_features(const Grid& grid, double t_h);

} // namespace stonet
