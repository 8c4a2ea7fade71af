#include "stonet/transport.hpp"

#include "stonet/error.hpp"
#include "stonet/fem.hpp"
#include "stonet/physics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace stonet {

double TransportResult::balance_error(double dt) const
{
    const double dm = mass_new - mass_old;
    const double flux = dt * (inflow - outflow);
    const double scale = std::max({std::abs(dm), std::abs(dt * inflow), std::abs(dt * outflow)});
    if (scale == 0.0)
        return 0.0;
    return std::abs(dm - flux) / scale;
}

bool in_source_band(double y, const TransportOptions& options)
{
    constexpr double eps = 1e-12;
    return y >= options.band_top - eps && y <= options.band_bottom + eps;
}

Eigen::VectorXd lumped_storage(const Grid& grid, const Eigen::VectorXd& rho_q, double phi)
{
    const auto& basis = grid.basis();
    Eigen::VectorXd m = Eigen::VectorXd::Zero(grid.node_count());
    for (int e = 0; e < grid.element_count(); ++e) {
        const auto nodes = grid.element_nodes(e);
        for (int q = 0; q < 4; ++q)
            for (int a = 0; a < 4; ++a)
                m[nodes[a]] += basis.weight * phi * rho_q[4 * e + q] * basis.value[q][a];
    }
    return m;
}

namespace {

/// Streamline-upwind parameter from the element Peclet number.
double supg_tau(const Eigen::Vector2d& v, const Eigen::Matrix2d& d, const Q1Basis& basis, int q)
{
    const double speed = v.norm();
    if (speed == 0.0)
        return 0.0;
    double proj = 0.0;
    for (int a = 0; a < 4; ++a)
        proj += std::abs(v.x() * basis.dx[q][a] + v.y() * basis.dy[q][a]);
    const double h = 2.0 * speed / proj;
    const double d_long = v.dot(d * v) / (speed * speed);
    const double pe = speed * h / (2.0 * d_long);
    const double xi = pe < 1e-3 ? pe / 3.0 : 1.0 / std::tanh(pe) - 1.0 / pe;
    return h * xi / (2.0 * speed);
}

} // namespace

TransportResult step_transport(const Eigen::VectorXd& c_old, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& rho_old, const Eigen::VectorXd& rho,
                               const Grid& grid, const DeterministicParams& det, double dt,
                               const TransportOptions& options)
{
    const int nn = grid.node_count();
    const int nq = grid.quad_count();
    if (!(dt > 0.0))
        throw ConfigError("step_transport: dt must be positive");
    if (c_old.size() != nn || v.size() != 2 * nq || rho.size() != nq || rho_old.size() != nq)
        throw ShapeError("step_transport: field sizes do not match the grid");

    const auto& basis = grid.basis();
    const Eigen::VectorXd m_old = lumped_storage(grid, rho_old, det.phi);
    const Eigen::VectorXd m_new = lumped_storage(grid, rho, det.phi);
    const Eigen::VectorXd c_old_q = interpolate_to_quadrature(grid, c_old);

    std::vector<Eigen::Triplet<double>> full;
    full.reserve(static_cast<std::size_t>(grid.element_count()) * 16 + nn);
    Eigen::VectorXd b_full = Eigen::VectorXd::Zero(nn);
    std::vector<Eigen::Triplet<double>> op;
    op.reserve(static_cast<std::size_t>(grid.element_count()) * 16);

    for (int n = 0; n < nn; ++n) {
        full.emplace_back(n, n, m_new[n] / dt);
        b_full[n] += m_old[n] * c_old[n] / dt;
    }

    for (int e = 0; e < grid.element_count(); ++e) {
        const auto nodes = grid.element_nodes(e);
        double ae[4][4] = {};
        double be[4] = {};
        for (int qi = 0; qi < 4; ++qi) {
            const int q = 4 * e + qi;
            const Eigen::Vector2d vq = vector_at(v, q);
            const Eigen::Matrix2d dq = rho[q] * dispersion_tensor(vq, det);
            const double w = basis.weight;
            double adv[4];
            for (int a = 0; a < 4; ++a)
                adv[a] = vq.x() * basis.dx[qi][a] + vq.y() * basis.dy[qi][a];
            const double tau = options.stabilization == Stabilization::Supg ? supg_tau(vq, dq / rho[q], basis, qi) : 0.0;
            for (int a = 0; a < 4; ++a) {
                const Eigen::Vector2d ga(basis.dx[qi][a], basis.dy[qi][a]);
                const Eigen::Vector2d dga = dq * ga;
                const double pa = tau * adv[a];
                for (int b = 0; b < 4; ++b) {
                    const double diffusion = dga.x() * basis.dx[qi][b] + dga.y() * basis.dy[qi][b];
                    const double advection = -adv[a] * rho[q] * basis.value[qi][b];
                    const double stab =
                        pa * (det.phi * rho[q] * basis.value[qi][b] / dt + rho[q] * adv[b]);
                    ae[a][b] += w * (diffusion + advection + stab);
                }
                be[a] += w * pa * det.phi * rho_old[q] * c_old_q[q] / dt;
            }
        }
        for (int a = 0; a < 4; ++a) {
            b_full[nodes[a]] += be[a];
            for (int b = 0; b < 4; ++b)
                op.emplace_back(nodes[a], nodes[b], ae[a][b]);
        }
    }

    SparseMatrix k_op(nn, nn);
    k_op.setFromTriplets(op.begin(), op.end());
    if (options.stabilization == Stabilization::Upwind) {
        // Pattern is symmetric, so every (r, c) has a partner (c, r).
        for (int col = 0; col < k_op.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(k_op, col); it; ++it) {
                const int r = static_cast<int>(it.row());
                if (r >= col)
                    continue;
                double& upper = it.valueRef();
                double& lower = k_op.coeffRef(col, r);
                const double d = std::max({0.0, upper, lower});
                if (d == 0.0)
                    continue;
                upper -= d;
                lower -= d;
                k_op.coeffRef(r, r) += d;
                k_op.coeffRef(col, col) += d;
            }
        }
    }
    for (int col = 0; col < k_op.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(k_op, col); it; ++it)
            full.emplace_back(static_cast<int>(it.row()), col, it.value());

    // Advective outflow through the right wall. The nodal flux is the consistent
    // one, G_i = int grad N_i . rho v, so a uniform c is preserved exactly where
    // fluid leaves; where G_i < 0 fresh water enters with c = 0.
    Eigen::VectorXd outflow_coeff = Eigen::VectorXd::Zero(nn);
    {
        const int i = grid.nx() - 1;
        for (int j = 0; j < grid.ny(); ++j) {
            const int e = j * grid.nx() + i;
            const auto nodes = grid.element_nodes(e);
            for (int qi = 0; qi < 4; ++qi) {
                const int q = 4 * e + qi;
                for (int a : {1, 2})
                    outflow_coeff[nodes[a]] += basis.weight * rho[q] *
                                               (v[2 * q] * basis.dx[qi][a] + v[2 * q + 1] * basis.dy[qi][a]);
            }
        }
        for (int n = 0; n < nn; ++n) {
            outflow_coeff[n] = std::max(outflow_coeff[n], 0.0);
            if (outflow_coeff[n] != 0.0)
                full.emplace_back(n, n, outflow_coeff[n]);
        }
    }

    SparseMatrix a_full(nn, nn);
    a_full.setFromTriplets(full.begin(), full.end());

    std::vector<int> dof(nn, -1);
    Eigen::VectorXd c_fixed = Eigen::VectorXd::Zero(nn);
    int nfree = 0;
    for (int n = 0; n < nn; ++n) {
        if (grid.node_i(n) == 0)
            c_fixed[n] = in_source_band(grid.node_point(n).y, options) ? 1.0 : 0.0;
        else
            dof[n] = nfree++;
    }

    std::vector<Eigen::Triplet<double>> reduced;
    reduced.reserve(static_cast<std::size_t>(a_full.nonZeros()));
    Eigen::VectorXd rhs(nfree);
    for (int n = 0; n < nn; ++n)
        if (dof[n] >= 0)
            rhs[dof[n]] = b_full[n];
    for (int col = 0; col < a_full.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(a_full, col); it; ++it) {
            const int r = dof[it.row()];
            if (r < 0)
                continue;
            const int cdof = dof[it.col()];
            if (cdof >= 0)
                reduced.emplace_back(r, cdof, it.value());
            else
                rhs[r] -= it.value() * c_fixed[it.col()];
        }
    }
    SparseMatrix a(nfree, nfree);
    a.setFromTriplets(reduced.begin(), reduced.end());

    Eigen::VectorXd x(nfree);
    for (int n = 0; n < nn; ++n)
        if (dof[n] >= 0)
            x[dof[n]] = c_old[n];

    TransportResult result;
    result.report = solve_nonsymmetric(a, rhs, x, options.tolerance, options.max_iterations,
                                       options.direct_threshold);

    result.c = c_fixed;
    for (int n = 0; n < nn; ++n)
        if (dof[n] >= 0)
            result.c[n] = x[dof[n]];

    const Eigen::VectorXd reaction = a_full * result.c - b_full;
    for (int n = 0; n < nn; ++n)
        if (dof[n] < 0)
            result.inflow += reaction[n];
    result.outflow = outflow_coeff.dot(result.c);
    result.mass_old = m_old.dot(c_old);
    result.mass_new = m_new.dot(result.c);
    return result;
}

} // namespace stonet
