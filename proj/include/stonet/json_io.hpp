/**
 * @file json_io.hpp
 * @brief JSON encodings of configuration types and little-endian binary arrays.
 */
#pragma once

#include "stonet/grid.hpp"
#include "stonet/scenario.hpp"
#include "stonet/simulation.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace stonet {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "stonet 1.0.0";

/// Rejects keys outside `allowed` so typos in config files fail loudly.
void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where);

Json to_json(const Grid& grid);
Grid grid_from_json(const Json& j);

Json to_json(const ScenarioParams& p);
ScenarioParams scenario_params_from_json(const Json& j);

Json to_json(const DeterministicParams& d);
DeterministicParams deterministic_params_from_json(const Json& j);

Json to_json(const REVSpec& r);
REVSpec rev_from_json(const Json& j);

Json to_json(const SolverConfig& c);
SolverConfig solver_config_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
/// meta.json with the producing command, its configuration and the tool version.
void write_artifact_meta(const std::filesystem::path& dir, const std::string& command, const Json& config);
void write_json(const std::filesystem::path& path, const Json& j);

/// Raw little-endian float64 arrays.
void write_f64(const std::filesystem::path& path, const double* data, std::size_t count);
void write_f64(const std::filesystem::path& path, const std::vector<double>& data);
void write_f64(const std::filesystem::path& path, const Eigen::VectorXd& data);
/// Throws FormatError naming the byte offset when the file is shorter or longer than expected.
std::vector<double> read_f64(const std::filesystem::path& path, std::size_t expected_count);

} // namespace stonet
