/**
 * @file snapshot_store.hpp
 * @brief On-disk layout of one simulated scenario.
 *
 * A scenario directory holds `meta.json` and little-endian float64 arrays:
 * `c_t<h>.bin` and `p_t<h>.bin` (one value per node, row-major node order),
 * `v_t<h>.bin` (quadrature points x 2, interleaved vx, vy) and `kfield.bin`
 * (quadrature points x 3: kxx, kyy, kxy). `<h>` is the snapshot time in whole hours.
 */
#pragma once

#include "stonet/grid.hpp"
#include "stonet/json_io.hpp"
#include "stonet/scenario.hpp"
#include "stonet/simulation.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace stonet {

struct StoredSimulation {
    Grid grid{70, 50};
    ScenarioParams params;
    DeterministicParams det;
    REVSpec rev;
    SolverConfig solver;
    PermeabilityField permeability;
    TimeSeries series;
};

std::string snapshot_file_name(const char* field, double time_h);

/// Writes the directory, creating it if needed. `extra_meta` is merged into meta.json.
void write_simulation(const std::filesystem::path& dir, const Scenario& scenario, const Grid& grid,
                      const SolverConfig& solver, const TimeSeries& series,
                      const Json& extra_meta = Json::object());

/// Reads a directory written by write_simulation. Velocity arrays are loaded
/// only when `with_velocity` is set.
StoredSimulation read_simulation(const std::filesystem::path& dir, bool with_velocity = true);

/// Directory name used for scenario `index` inside a batch directory.
std::string scenario_dir_name(std::uint64_t index);

} // namespace stonet
