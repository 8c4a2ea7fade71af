#include "stonet/simulation.hpp"

#include "stonet/error.hpp"
#include "stonet/fem.hpp"
#include "stonet/physics.hpp"
#include "stonet/pressure.hpp"
#include "stonet/transport.hpp"

#include <cmath>

namespace stonet {

void SolverConfig::validate() const
{
    if (!(dt > 0.0) || !(t_end > 0.0) || !(record_interval > 0.0))
        throw ConfigError("solver config: dt, t_end and record interval must be positive");
    const double ratio = t_end / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw ConfigError("solver config: t_end must be an integer multiple of dt");
    const double rec = record_interval / dt;
    if (std::abs(rec - std::round(rec)) > 1e-9 * rec)
        throw ConfigError("solver config: record interval must be an integer multiple of dt");
    if (coupling_iterations < 1)
        throw ConfigError("solver config: coupling_iterations must be >= 1");
}

int SolverConfig::steps() const
{
    return static_cast<int>(std::lround(t_end / dt));
}

int SolverConfig::record_every() const
{
    return static_cast<int>(std::lround(record_interval / dt));
}

namespace {

Eigen::VectorXd density_at_quadrature(const Grid& grid, const Eigen::VectorXd& c,
                                      const DeterministicParams& det)
{
    Eigen::VectorXd rho = interpolate_to_quadrature(grid, c);
    for (auto& r : rho)
        r = density_of(r, det);
    return rho;
}

} // namespace

TimeSeries run_simulation(const Scenario& scenario, const Grid& grid, const SolverConfig& config)
{
    config.validate();
    const auto& det = scenario.det;
    const BoundaryProfiles bc = boundary_pressure_profiles(scenario.params, det);

    PressureOptions popt;
    popt.tolerance = config.pressure_tolerance;
    TransportOptions topt;
    topt.stabilization = config.stabilization;
    topt.band_top = config.band_top;
    topt.band_bottom = config.band_bottom;
    topt.tolerance = config.transport_tolerance;
    topt.direct_threshold = config.direct_threshold;

    TimeSeries series;
    series.scenario = scenario.params;

    Eigen::VectorXd c = Eigen::VectorXd::Zero(grid.node_count());
    PressureSolution pressure = solve_pressure(c, scenario.permeability, bc, grid, det, popt);
    series.times_h.push_back(0.0);
    series.c.push_back(c);
    series.p.push_back(pressure.p);
    series.v.push_back(pressure.v);

    const int steps = config.steps();
    const int every = config.record_every();
    for (int step = 1; step <= steps; ++step) {
        try {
            const Eigen::VectorXd rho_old = density_at_quadrature(grid, c, det);
            Eigen::VectorXd c_iter = c;
            TransportResult tr;
            int used = 0;
            for (int it = 0; it < config.coupling_iterations; ++it) {
                pressure = solve_pressure(c_iter, scenario.permeability, bc, grid, det, popt, &pressure.p);
                tr = step_transport(c, pressure.v, rho_old, pressure.rho, grid, det, config.dt, topt);
                ++used;
                const double change = (tr.c - c_iter).cwiseAbs().maxCoeff();
                c_iter = tr.c;
                if (config.coupling_iterations > 1 && change < config.coupling_tolerance)
                    break;
            }
            c = tr.c;

            StepDiagnostics d;
            d.step = step;
            d.time = step * config.dt;
            d.pressure_residual = pressure.report.relative_residual;
            d.pressure_iterations = pressure.report.iterations;
            d.transport_residual = tr.report.relative_residual;
            d.balance_error = tr.balance_error(config.dt);
            d.mass = tr.mass_new;
            d.inflow = tr.inflow;
            d.outflow = tr.outflow;
            d.c_min = c.minCoeff();
            d.c_max = c.maxCoeff();
            d.coupling_iterations = used;
            series.steps.push_back(d);
        } catch (const SolverError& err) {
            throw SolverError("step " + std::to_string(step) + ": " + err.what(), err.residual_history());
        }

        if (step % every == 0) {
            series.times_h.push_back(step * config.dt / 3600.0);
            series.c.push_back(c);
            series.p.push_back(pressure.p);
            series.v.push_back(pressure.v);
        }
    }
    return series;
}

} // namespace stonet
