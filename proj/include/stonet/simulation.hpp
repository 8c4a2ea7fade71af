/**
 * @file simulation.hpp
 * @brief Sequentially coupled density-driven flow and transport run.
 */
#pragma once

#include "stonet/grid.hpp"
#include "stonet/scenario.hpp"
#include "stonet/transport.hpp"

#include <Eigen/Dense>

#include <vector>

namespace stonet {

struct SolverConfig {
    double dt = 1200.0;              // s
    double t_end = 129600.0;         // s (36 h)
    double record_interval = 14400.0;  // s (4 h)
    double pressure_tolerance = 1e-10;
    double transport_tolerance = 1e-12;
    Stabilization stabilization = Stabilization::Upwind;
    double band_top = 0.20;          // m
    double band_bottom = 0.30;       // m
    /// 1 = sequential coupling; >1 enables fixed-point iteration on c.
    int coupling_iterations = 1;
    double coupling_tolerance = 1e-8;
    int direct_threshold = 0;

    void validate() const;
    int steps() const;
    int record_every() const;
};

struct StepDiagnostics {
    int step = 0;
    double time = 0.0;               // s, end of step
    double pressure_residual = 0.0;
    int pressure_iterations = 0;
    double transport_residual = 0.0;
    double balance_error = 0.0;
    double mass = 0.0;
    double inflow = 0.0;
    double outflow = 0.0;
    double c_min = 0.0;
    double c_max = 0.0;
    int coupling_iterations = 1;
};

/// Snapshots at every record interval, including t = 0.
struct TimeSeries {
    std::vector<double> times_h;
    std::vector<Eigen::VectorXd> c;  // nodal
    std::vector<Eigen::VectorXd> p;  // nodal, Pa
    std::vector<Eigen::VectorXd> v;  // quadrature, interleaved, m/s
    ScenarioParams scenario;
    std::vector<StepDiagnostics> steps;

    std::size_t size() const { return times_h.size(); }
};

/// Initial condition c = 0. Throws SolverError tagged with the failing step.
TimeSeries run_simulation(const Scenario& scenario, const Grid& grid, const SolverConfig& config = {});

} // namespace stonet
