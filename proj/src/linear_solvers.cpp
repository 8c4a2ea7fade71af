#include "stonet/linear_solvers.hpp"

#include "stonet/error.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <cmath>

namespace stonet {

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x)
{
    const double bn = b.norm();
    const double rn = (b - a * x).norm();
    return bn > 0.0 ? rn / bn : rn;
}

SolveReport solve_symmetric(const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                            double tolerance, int max_iterations)
{
    SolveReport report;
    report.method = "pcg-jacobi";
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero();
        return report;
    }
    const Eigen::VectorXd inv_diag = a.diagonal().cwiseInverse();
    Eigen::VectorXd r = b - a * x;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    Eigen::VectorXd ap(b.size());
    double rz = r.dot(z);
    double rel = r.norm() / bnorm;
    report.history.push_back(rel);

    int it = 0;
    while (rel > tolerance && it < max_iterations) {
        ap.noalias() = a * p;
        const double alpha = rz / p.dot(ap);
        x += alpha * p;
        r -= alpha * ap;
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
        ++it;
        rel = r.norm() / bnorm;
        report.history.push_back(rel);
        if (rel <= tolerance) {
            // Guard against drift of the recursive residual.
            r = b - a * x;
            rel = r.norm() / bnorm;
        }
    }
    report.iterations = it;
    report.relative_residual = relative_residual(a, b, x);
    if (!(report.relative_residual <= tolerance))
        throw SolverError("pressure CG did not converge: relative residual " +
                              std::to_string(report.relative_residual) + " after " +
                              std::to_string(it) + " iterations",
                          report.history);
    return report;
}

namespace {

SolveReport solve_direct(const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x)
{
    SolveReport report;
    report.method = "sparse-lu";
    Eigen::SparseLU<SparseMatrix> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success)
        throw SolverError("sparse LU factorization failed", {});
    x = lu.solve(b);
    report.relative_residual = relative_residual(a, b, x);
    report.history.push_back(report.relative_residual);
    return report;
}

} // namespace

SolveReport solve_nonsymmetric(const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                               double tolerance, int max_iterations, int direct_threshold)
{
    if (a.rows() <= direct_threshold)
        return solve_direct(a, b, x);

    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>> solver;
    solver.setTolerance(tolerance);
    solver.setMaxIterations(max_iterations);
    solver.compute(a);
    SolveReport report;
    report.method = "bicgstab-ilut";
    if (solver.info() == Eigen::Success) {
        const Eigen::VectorXd guess = x;
        x = solver.solveWithGuess(b, guess);
        report.iterations = static_cast<int>(solver.iterations());
        report.relative_residual = relative_residual(a, b, x);
        report.history.push_back(solver.error());
        if (std::isfinite(report.relative_residual) && report.relative_residual <= 10.0 * tolerance)
            return report;
    }
    auto fallback = solve_direct(a, b, x);
    fallback.history.insert(fallback.history.begin(), report.history.begin(), report.history.end());
    if (!(fallback.relative_residual <= 10.0 * tolerance))
        throw SolverError("transport solve did not converge: relative residual " +
                              std::to_string(fallback.relative_residual),
                          fallback.history);
    return fallback;
}

} // namespace stonet
