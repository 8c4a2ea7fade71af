/**
 * @file oracles.hpp
 * @brief Independent reference computations used by the tests and the
 *        acceptance suite. None of them shares code paths with the quantity
 *        they check beyond the public inputs.
 */
#pragma once

#include "stonet/grid.hpp"
#include "stonet/operator_model.hpp"
#include "stonet/scenario.hpp"
#include "stonet/snapshot_store.hpp"

#include <Eigen/Dense>

#include <vector>

namespace stonet::verify {

/// k(i) by a direct double loop over all point pairs, no summed-area tables.
PermeabilityField brute_force_permeability(const FractureField& fractures, const Grid& grid, const REVSpec& rev,
                                           const DeterministicParams& det);

/// Largest |v| of a c = 0 pressure solve with equal boundary offsets.
double hydrostatic_max_velocity(const Scenario& scenario, const Grid& grid);

struct ConvergenceStudy {
    std::vector<int> nx;
    std::vector<double> l2_error;
    std::vector<double> order;  // between consecutive levels
};

/// Manufactured solution q* = sin(pi x / Lx) cos(pi y / Ly) for the
/// deviation from hydrostatic pressure, uniform k = k_r, c = 0. L2 error by a
/// 3x3 Gauss rule per element.
ConvergenceStudy pressure_convergence(const std::vector<int>& nx_levels, const std::vector<int>& ny_levels);

/// v = 0, c(x, 0) a step at x0 = Lx/2 (value 1/2 on the step node), whole left
/// wall held at 1. Relative nodal L2 distance to
/// 0.5 erfc((x - x0) / (2 sqrt(tau D_mol t))) after `hours`.
double diffusion_profile_error(const Grid& grid, double hours, double dt = 1200.0);

/// True backward-difference rates looked up by node position and time.
class TrueRateModel : public RateModel {
public:
    explicit TrueRateModel(const StoredSimulation& sim);
    Eigen::VectorXd rates(const Eigen::MatrixXd& branch, const Eigen::MatrixXd& trunk) const override;

protected:
    int node_of(double x, double y) const;
    int step_of(double t_h) const;

    Grid grid_;
    std::vector<double> times_h_;
    std::vector<Eigen::VectorXd> c_;
    std::vector<Eigen::VectorXd> rates_;
};

/// Rates whose Euler rollout lands on c_true(t_k) + amplitude * D_k * xi,
/// D_k = max(max |c_true(t_k)|, 0.1) and xi ~ N(0, 1) keyed by (seed, node, k).
class NoisyOracleModel : public TrueRateModel {
public:
    NoisyOracleModel(const StoredSimulation& sim, double amplitude, std::uint64_t seed);
    Eigen::VectorXd rates(const Eigen::MatrixXd& branch, const Eigen::MatrixXd& trunk) const override;

private:
    double noise(int node, int k) const;
    double amplitude_;
    std::uint64_t seed_;
};

} // namespace stonet::verify
