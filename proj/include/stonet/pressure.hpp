/**
 * @file pressure.hpp
 * @brief Boussinesq pressure equation div(-(k/mu)(grad p - rho(c) g)) = f.
 *
 * Dirichlet hydrostatic profiles on the left and right walls, no flow on the
 * top and bottom. The unknown is the deviation from the fresh-water hydrostat,
 * q = p - rho0 g y, which keeps the hydrostatic state exactly representable.
 */
#pragma once

#include "stonet/grid.hpp"
#include "stonet/linear_solvers.hpp"
#include "stonet/scenario.hpp"

#include <Eigen/Dense>

#include <functional>

namespace stonet {

struct PressureOptions {
    double tolerance = 1e-10;
    int max_iterations = 100000;
    /// Optional volumetric source f(x, y), used for manufactured solutions.
    std::function<double(double, double)> source;
};

struct PressureSolution {
    Eigen::VectorXd p;     // nodal pressure (Pa)
    Eigen::VectorXd v;     // quadrature velocity, interleaved (m/s)
    Eigen::VectorXd rho;   // quadrature density (kg/m^3)
    SolveReport report;
};

/// `initial_p`, when given, warm-starts the solve.
PressureSolution solve_pressure(const Eigen::VectorXd& c, const PermeabilityField& k,
                                const BoundaryProfiles& bc, const Grid& grid,
                                const DeterministicParams& det, const PressureOptions& options = {},
                                const Eigen::VectorXd* initial_p = nullptr);

} // namespace stonet
