#include "stonet/verify/oracles.hpp"

#include "stonet/dataset.hpp"
#include "stonet/error.hpp"
#include "stonet/pressure.hpp"
#include "stonet/rng.hpp"
#include "stonet/transport.hpp"

#include <cmath>

namespace stonet::verify {

PermeabilityField brute_force_permeability(const FractureField& fractures, const Grid& grid, const REVSpec& rev,
                                           const DeterministicParams& det)
{
    const int nq = grid.quad_count();
    PermeabilityField k;
    k.kxx.assign(static_cast<std::size_t>(nq), 0.0);
    k.kyy.assign(static_cast<std::size_t>(nq), 0.0);
    k.kxy.assign(static_cast<std::size_t>(nq), 0.0);
    for (int i = 0; i < nq; ++i) {
        const Point2 pi = grid.quad_point(i);
        Eigen::Matrix2d sum = Eigen::Matrix2d::Zero();
        int members = 0;
        for (int j = 0; j < nq; ++j) {
            const Point2 pj = grid.quad_point(j);
            if (!within_half_width(pi.x, pj.x, 0.5 * rev.window_x) || !within_half_width(pi.y, pj.y, 0.5 * rev.window_y))
                continue;
            ++members;
            const auto jj = static_cast<std::size_t>(j);
            const double theta = fractures.theta[jj] * M_PI / 180.0;
            const Eigen::Vector2d n(-std::sin(theta), std::cos(theta));
            const Eigen::Matrix2d m = Eigen::Matrix2d::Identity() - n * n.transpose();
            sum += fractures.count[jj] * std::pow(fractures.aperture[jj], 3) * fractures.length[jj] * m;
        }
        if (members == 0)
            throw Error("brute_force_permeability: empty window");
        const Eigen::Matrix2d km = det.k_r * Eigen::Matrix2d::Identity() + sum / (12.0 * rev.volume * members);
        const auto ii = static_cast<std::size_t>(i);
        k.kxx[ii] = km(0, 0);
        k.kyy[ii] = km(1, 1);
        k.kxy[ii] = km(0, 1);
    }
    return k;
}

double hydrostatic_max_velocity(const Scenario& scenario, const Grid& grid)
{
    ScenarioParams params = scenario.params;
    params.p_right_offset = params.p_left_offset;
    const BoundaryProfiles bc = boundary_pressure_profiles(params, scenario.det);
    const Eigen::VectorXd c = Eigen::VectorXd::Zero(grid.node_count());
    const PressureSolution sol = solve_pressure(c, scenario.permeability, bc, grid, scenario.det);
    double vmax = 0.0;
    for (int q = 0; q < grid.quad_count(); ++q)
        vmax = std::max(vmax, std::hypot(sol.v[2 * q], sol.v[2 * q + 1]));
    return vmax;
}

ConvergenceStudy pressure_convergence(const std::vector<int>& nx_levels, const std::vector<int>& ny_levels)
{
    if (nx_levels.size() != ny_levels.size() || nx_levels.size() < 2)
        throw Error("pressure_convergence: need at least two matching mesh levels");
    const DeterministicParams det;
    const double lx = 0.7, ly = 0.5;
    const double a = M_PI / lx, b = M_PI / ly;
    const double mobility = det.k_r / det.mu;
    auto exact = [&](double x, double y) { return std::sin(a * x) * std::cos(b * y); };

    ConvergenceStudy study;
    for (std::size_t level = 0; level < nx_levels.size(); ++level) {
        const Grid grid(nx_levels[level], ny_levels[level], lx, ly);
        ScenarioParams params;
        params.p_left_offset = 0.0;
        params.p_right_offset = 0.0;
        const BoundaryProfiles bc = boundary_pressure_profiles(params, det);
        PressureOptions opt;
        opt.tolerance = 1e-11;
        opt.source = [&](double x, double y) { return mobility * (a * a + b * b) * exact(x, y); };
        const PressureSolution sol =
            solve_pressure(Eigen::VectorXd::Zero(grid.node_count()),
                           PermeabilityField::uniform(static_cast<std::size_t>(grid.quad_count()), det.k_r), bc, grid,
                           det, opt);

        // 3x3 Gauss-Legendre on each element, bilinear interpolation of nodal q.
        const double gp[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
        const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        double err2 = 0.0;
        for (int e = 0; e < grid.element_count(); ++e) {
            const auto nodes = grid.element_nodes(e);
            const Point2 p0 = grid.node_point(nodes[0]);
            double qn[4];
            for (int k = 0; k < 4; ++k) {
                const Point2 pk = grid.node_point(nodes[k]);
                qn[k] = sol.p[nodes[k]] - det.rho0 * det.g * pk.y;
            }
            for (int s = 0; s < 3; ++s)
                for (int t = 0; t < 3; ++t) {
                    const double xi = 0.5 * (gp[s] + 1.0), eta = 0.5 * (gp[t] + 1.0);
                    const double qh = qn[0] * (1 - xi) * (1 - eta) + qn[1] * xi * (1 - eta) + qn[2] * xi * eta +
                                      qn[3] * (1 - xi) * eta;
                    const double x = p0.x + xi * grid.dx(), y = p0.y + eta * grid.dy();
                    const double d = qh - exact(x, y);
                    err2 += 0.25 * gw[s] * gw[t] * grid.dx() * grid.dy() * d * d;
                }
        }
        study.nx.push_back(grid.nx());
        study.l2_error.push_back(std::sqrt(err2));
    }
    for (std::size_t level = 1; level < study.l2_error.size(); ++level) {
        const double ratio = static_cast<double>(study.nx[level]) / study.nx[level - 1];
        study.order.push_back(std::log(study.l2_error[level - 1] / study.l2_error[level]) / std::log(ratio));
    }
    return study;
}

double diffusion_profile_error(const Grid& grid, double hours, double dt)
{
    const DeterministicParams det;
    const double x0 = 0.5 * grid.length_x();
    Eigen::VectorXd c(grid.node_count());
    for (int n = 0; n < grid.node_count(); ++n) {
        const double x = grid.node_point(n).x;
        const double d = x - x0;
        c[n] = std::abs(d) < 1e-12 ? 0.5 : (d < 0.0 ? 1.0 : 0.0);
    }
    TransportOptions opt;
    opt.band_top = 0.0;
    opt.band_bottom = grid.length_y();
    const Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * grid.quad_count());
    const int steps = static_cast<int>(std::lround(hours * 3600.0 / dt));
    for (int s = 0; s < steps; ++s) {
        Eigen::VectorXd rho(grid.quad_count());
        const Eigen::VectorXd cq = [&] {
            Eigen::VectorXd out(grid.quad_count());
            const Q1Basis& basis = grid.basis();
            for (int e = 0; e < grid.element_count(); ++e) {
                const auto nodes = grid.element_nodes(e);
                for (int q = 0; q < 4; ++q) {
                    double val = 0.0;
                    for (int a = 0; a < 4; ++a)
                        val += basis.value[q][a] * c[nodes[a]];
                    out[4 * e + q] = val;
                }
            }
            return out;
        }();
        for (int q = 0; q < grid.quad_count(); ++q)
            rho[q] = det.rho0 + (det.rho_s - det.rho0) * std::clamp(cq[q], 0.0, 1.0);
        c = step_transport(c, v, rho, rho, grid, det, dt, opt).c;
    }
    const double t = steps * dt;
    const double spread = 2.0 * std::sqrt(det.tau * det.d_mol * t);
    Eigen::VectorXd exact(grid.node_count());
    for (int n = 0; n < grid.node_count(); ++n)
        exact[n] = 0.5 * std::erfc((grid.node_point(n).x - x0) / spread);
    return (c - exact).norm() / exact.norm();
}

TrueRateModel::TrueRateModel(const StoredSimulation& sim)
    : grid_(sim.grid), times_h_(sim.series.times_h), c_(sim.series.c), rates_(concentration_rate(sim.series))
{
}

int TrueRateModel::node_of(double x, double y) const
{
    const int i = static_cast<int>(std::lround(x / grid_.dx()));
    const int j = static_cast<int>(std::lround(y / grid_.dy()));
    if (i < 0 || i > grid_.nx() || j < 0 || j > grid_.ny())
        throw Error("oracle: query outside the grid");
    return grid_.node(i, j);
}

int TrueRateModel::step_of(double t_h) const
{
    for (std::size_t k = 1; k < times_h_.size(); ++k)
        if (std::abs(times_h_[k] - t_h) < 1e-9)
            return static_cast<int>(k);
    throw Error("oracle: query time " + std::to_string(t_h) + " h is not a snapshot time");
}

Eigen::VectorXd TrueRateModel::rates(const Eigen::MatrixXd&, const Eigen::MatrixXd& trunk) const
{
    Eigen::VectorXd out(trunk.rows());
    for (Eigen::Index r = 0; r < trunk.rows(); ++r)
        out[r] = rates_[static_cast<std::size_t>(step_of(trunk(r, 2)) - 1)][node_of(trunk(r, 0), trunk(r, 1))];
    return out;
}

NoisyOracleModel::NoisyOracleModel(const StoredSimulation& sim, double amplitude, std::uint64_t seed)
    : TrueRateModel(sim), amplitude_(amplitude), seed_(seed)
{
}

double NoisyOracleModel::noise(int node, int k) const
{
    if (k == 0)
        return 0.0;
    const auto kk = static_cast<std::size_t>(k);
    const double scale = std::max(c_[kk].cwiseAbs().maxCoeff(), 0.1);
    CounterRng rng{seed_, static_cast<std::uint64_t>(RngTag::Noise), static_cast<std::uint64_t>(node),
                   static_cast<std::uint64_t>(k)};
    return amplitude_ * scale * rng.normal();
}

Eigen::VectorXd NoisyOracleModel::rates(const Eigen::MatrixXd& branch, const Eigen::MatrixXd& trunk) const
{
    Eigen::VectorXd out = TrueRateModel::rates(branch, trunk);
    for (Eigen::Index r = 0; r < trunk.rows(); ++r) {
        const int k = step_of(trunk(r, 2));
        const int node = node_of(trunk(r, 0), trunk(r, 1));
        const double dt = times_h_[static_cast<std::size_t>(k)] - times_h_[static_cast<std::size_t>(k - 1)];
        out[r] += (noise(node, k) - noise(node, k - 1)) / dt;
    }
    return out;
}

} // namespace stonet::verify
