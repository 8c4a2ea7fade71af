/**
 * @file linear_solvers.hpp
 * @brief Krylov solvers used by the pressure and transport steps.
 */
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace stonet {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct SolveReport {
    std::string method;
    int iterations = 0;
    /// ||b - A x|| / ||b|| recomputed from the final iterate.
    double relative_residual = 0.0;
    std::vector<double> history;
};

/// Jacobi-preconditioned conjugate gradient; `x` holds the initial guess on entry.
/// Throws SolverError (with the residual history) when `tolerance` is not reached.
SolveReport solve_symmetric(const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                            double tolerance, int max_iterations);

/// BiCGSTAB with an incomplete-LU preconditioner, falling back to sparse LU when
/// the Krylov solve stalls or the system has at most `direct_threshold` unknowns.
SolveReport solve_nonsymmetric(const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                               double tolerance, int max_iterations, int direct_threshold = 0);

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x);

} // namespace stonet
