/**
 * @file transport.hpp
 * @brief One backward-Euler step of phi d(rho c)/dt + div(rho c v) - div(rho D grad c) = 0.
 *
 * Q1 Galerkin with a lumped storage term. The advective part is stabilized
 * either by algebraic upwinding (the default: symmetric artificial diffusion
 * d_ij = max(0, a_ij, a_ji) that turns the operator into an M-matrix, so the
 * step is positivity preserving and conservative) or by SUPG with the element
 * Peclet tau. Boundary conditions: Dirichlet c = 1 on
 * the left-wall source band and c = 0 on the rest of that wall, advective
 * outflow with zero dispersive flux on the right wall, zero total flux on the
 * top and bottom.
 */
#pragma once

#include "stonet/grid.hpp"
#include "stonet/linear_solvers.hpp"
#include "stonet/scenario.hpp"

#include <Eigen/Dense>

namespace stonet {

enum class Stabilization { None, Upwind, Supg };

struct TransportOptions {
    Stabilization stabilization = Stabilization::Upwind;
    double band_top = 0.20;     // m, measured downward
    double band_bottom = 0.30;  // m
    double tolerance = 1e-12;
    int max_iterations = 5000;
    /// Systems with at most this many unknowns go straight to sparse LU.
    int direct_threshold = 0;
};

struct TransportResult {
    Eigen::VectorXd c;
    double mass_old = 0.0;   // sum_i m_i(rho_old) c_old_i  (kg per m depth)
    double mass_new = 0.0;
    double inflow = 0.0;     // kg/s per m, Dirichlet reactions
    double outflow = 0.0;    // kg/s per m, right-wall advective flux
    SolveReport report;

    /// |dM - dt (in - out)| relative to the largest of the three terms.
    double balance_error(double dt) const;
};

bool in_source_band(double y, const TransportOptions& options);

/// Lumped storage phi rho_q integrated against each shape function.
Eigen::VectorXd lumped_storage(const Grid& grid, const Eigen::VectorXd& rho_q, double phi);

/// `rho_old` weights the previous storage; `rho` is used in every other term.
TransportResult step_transport(const Eigen::VectorXd& c_old, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& rho_old, const Eigen::VectorXd& rho,
                               const Grid& grid, const DeterministicParams& det, double dt,
                               const TransportOptions& options = {});

} // namespace stonet
