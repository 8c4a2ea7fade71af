#include "stonet/snapshot_store.hpp"

#include "stonet/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace stonet {

namespace fs = std::filesystem;

std::string snapshot_file_name(const char* field, double time_h)
{
    const long hours = std::lround(time_h);
    if (std::abs(time_h - static_cast<double>(hours)) > 1e-9)
        throw FormatError("snapshot time " + std::to_string(time_h) + " h is not a whole hour");
    return std::string(field) + "_t" + std::to_string(hours) + ".bin";
}

std::string scenario_dir_name(std::uint64_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "scenario_%05llu", static_cast<unsigned long long>(index));
    return buf;
}

void write_simulation(const fs::path& dir, const Scenario& scenario, const Grid& grid,
                      const SolverConfig& solver, const TimeSeries& series, const Json& extra_meta)
{
    fs::create_directories(dir);
    const auto nq = static_cast<std::size_t>(grid.quad_count());
    const auto nn = static_cast<std::size_t>(grid.node_count());

    std::vector<double> k(3 * nq);
    for (std::size_t q = 0; q < nq; ++q) {
        k[3 * q] = scenario.permeability.kxx[q];
        k[3 * q + 1] = scenario.permeability.kyy[q];
        k[3 * q + 2] = scenario.permeability.kxy[q];
    }
    write_f64(dir / "kfield.bin", k);

    Json files = Json::array();
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double t = series.times_h[s];
        write_f64(dir / snapshot_file_name("c", t), series.c[s]);
        write_f64(dir / snapshot_file_name("p", t), series.p[s]);
        write_f64(dir / snapshot_file_name("v", t), series.v[s]);
        files.push_back({{"time_h", t},
                         {"c", snapshot_file_name("c", t)},
                         {"p", snapshot_file_name("p", t)},
                         {"v", snapshot_file_name("v", t)}});
    }

    double worst_balance = 0.0, c_min = 0.0, c_max = 0.0;
    for (const auto& d : series.steps) {
        worst_balance = std::max(worst_balance, d.balance_error);
        c_min = std::min(c_min, d.c_min);
        c_max = std::max(c_max, d.c_max);
    }

    Json meta = {
        {"tool_version", kToolVersion},
        {"scenario", to_json(scenario.params)},
        {"deterministic", to_json(scenario.det)},
        {"rev", to_json(scenario.rev)},
        {"grid", to_json(grid)},
        {"solver", to_json(solver)},
        {"times_h", series.times_h},
        {"snapshots", files},
        {"shapes",
         {{"c", {nn}}, {"p", {nn}}, {"v", {nq, 2}}, {"kfield", {nq, 3}}}},
        {"diagnostics",
         {{"steps", series.steps.size()},
          {"max_balance_error", worst_balance},
          {"c_min", c_min},
          {"c_max", c_max}}},
    };
    for (const auto& item : extra_meta.items())
        meta[item.key()] = item.value();
    write_json(dir / "meta.json", meta);
}

StoredSimulation read_simulation(const fs::path& dir, bool with_velocity)
{
    const Json meta = read_json(dir / "meta.json");
    for (const char* key : {"scenario", "deterministic", "rev", "grid", "solver", "times_h"})
        if (!meta.contains(key))
            throw FormatError((dir / "meta.json").string() + ": missing '" + key + "'");

    StoredSimulation out;
    out.grid = grid_from_json(meta.at("grid"));
    out.params = scenario_params_from_json(meta.at("scenario"));
    out.det = deterministic_params_from_json(meta.at("deterministic"));
    out.rev = rev_from_json(meta.at("rev"));
    out.solver = solver_config_from_json(meta.at("solver"));

    const auto nq = static_cast<std::size_t>(out.grid.quad_count());
    const auto nn = static_cast<std::size_t>(out.grid.node_count());
    const auto k = read_f64(dir / "kfield.bin", 3 * nq);
    out.permeability.kxx.resize(nq);
    out.permeability.kyy.resize(nq);
    out.permeability.kxy.resize(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        out.permeability.kxx[q] = k[3 * q];
        out.permeability.kyy[q] = k[3 * q + 1];
        out.permeability.kxy[q] = k[3 * q + 2];
    }

    auto to_vector = [](const std::vector<double>& v) {
        return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
    };

    out.series.scenario = out.params;
    for (double t : meta.at("times_h").get<std::vector<double>>()) {
        out.series.times_h.push_back(t);
        out.series.c.push_back(to_vector(read_f64(dir / snapshot_file_name("c", t), nn)));
        out.series.p.push_back(to_vector(read_f64(dir / snapshot_file_name("p", t), nn)));
        if (with_velocity)
            out.series.v.push_back(to_vector(read_f64(dir / snapshot_file_name("v", t), 2 * nq)));
    }
    return out;
}

} // namespace stonet
