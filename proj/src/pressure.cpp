#include "stonet/pressure.hpp"

#include "stonet/error.hpp"
#include "stonet/fem.hpp"
#include "stonet/physics.hpp"

#include <vector>

namespace stonet {

PressureSolution solve_pressure(const Eigen::VectorXd& c, const PermeabilityField& k,
                                const BoundaryProfiles& bc, const Grid& grid,
                                const DeterministicParams& det, const PressureOptions& options,
                                const Eigen::VectorXd* initial_p)
{
    const int nn = grid.node_count();
    const int nq = grid.quad_count();
    if (c.size() != nn || static_cast<int>(k.size()) != nq)
        throw ShapeError("solve_pressure: field sizes do not match the grid");

    const double hydro = det.hydrostatic_gradient();
    const auto& basis = grid.basis();

    // Dirichlet walls; free nodes are renumbered contiguously.
    std::vector<int> dof(nn, -1);
    Eigen::VectorXd q_fixed = Eigen::VectorXd::Zero(nn);
    int nfree = 0;
    for (int n = 0; n < nn; ++n) {
        const int i = grid.node_i(n);
        if (i == 0)
            q_fixed[n] = bc.left_offset;
        else if (i == grid.nx())
            q_fixed[n] = bc.right_offset;
        else
            dof[n] = nfree++;
    }

    const Eigen::VectorXd c_q = interpolate_to_quadrature(grid, c);
    Eigen::VectorXd rho(nq);
    for (int q = 0; q < nq; ++q)
        rho[q] = density_of(c_q[q], det);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(grid.element_count()) * 16);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
    const Eigen::Vector2d g = gravity_vector(det);

    for (int e = 0; e < grid.element_count(); ++e) {
        const auto nodes = grid.element_nodes(e);
        double ke[4][4] = {};
        double fe[4] = {};
        for (int qi = 0; qi < 4; ++qi) {
            const int q = 4 * e + qi;
            const Eigen::Matrix2d mob = k.at(q) / det.mu;
            const Eigen::Vector2d buoy = mob * ((rho[q] - det.rho0) * g);
            double src = 0.0;
            if (options.source) {
                const Point2 pt = grid.quad_point(q);
                src = options.source(pt.x, pt.y);
            }
            for (int a = 0; a < 4; ++a) {
                const Eigen::Vector2d ga(basis.dx[qi][a], basis.dy[qi][a]);
                const Eigen::Vector2d mga = mob * ga;
                for (int b = 0; b < 4; ++b)
                    ke[a][b] += basis.weight * (mga.x() * basis.dx[qi][b] + mga.y() * basis.dy[qi][b]);
                fe[a] += basis.weight * (ga.dot(buoy) + basis.value[qi][a] * src);
            }
        }
        for (int a = 0; a < 4; ++a) {
            const int ra = dof[nodes[a]];
            if (ra < 0)
                continue;
            rhs[ra] += fe[a];
            for (int b = 0; b < 4; ++b) {
                const int cb = dof[nodes[b]];
                if (cb >= 0)
                    triplets.emplace_back(ra, cb, ke[a][b]);
                else
                    rhs[ra] -= ke[a][b] * q_fixed[nodes[b]];
            }
        }
    }
    SparseMatrix a(nfree, nfree);
    a.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::VectorXd x(nfree);
    for (int n = 0; n < nn; ++n) {
        if (dof[n] < 0)
            continue;
        if (initial_p) {
            x[dof[n]] = (*initial_p)[n] - hydro * grid.node_point(n).y;
        } else {
            const double s = grid.node_point(n).x / grid.length_x();
            x[dof[n]] = (1.0 - s) * bc.left_offset + s * bc.right_offset;
        }
    }

    PressureSolution sol;
    sol.report = solve_symmetric(a, rhs, x, options.tolerance, options.max_iterations);

    Eigen::VectorXd qn = q_fixed;
    for (int n = 0; n < nn; ++n)
        if (dof[n] >= 0)
            qn[n] = x[dof[n]];

    sol.p.resize(nn);
    for (int n = 0; n < nn; ++n)
        sol.p[n] = qn[n] + hydro * grid.node_point(n).y;

    sol.v.resize(2 * nq);
    for (int e = 0; e < grid.element_count(); ++e) {
        const auto nodes = grid.element_nodes(e);
        for (int qi = 0; qi < 4; ++qi) {
            const int q = 4 * e + qi;
            Eigen::Vector2d grad_q = Eigen::Vector2d::Zero();
            for (int a = 0; a < 4; ++a) {
                grad_q.x() += basis.dx[qi][a] * qn[nodes[a]];
                grad_q.y() += basis.dy[qi][a] * qn[nodes[a]];
            }
            // grad p = grad q + rho0 g; subtracting rho g inside darcy_velocity.
            const Eigen::Vector2d grad_p = grad_q + Eigen::Vector2d(0.0, hydro);
            const Eigen::Vector2d v = darcy_velocity(grad_p, rho[q], k.at(q), det);
            sol.v[2 * q] = v.x();
            sol.v[2 * q + 1] = v.y();
        }
    }
    sol.rho = std::move(rho);
    return sol;
}

} // namespace stonet
