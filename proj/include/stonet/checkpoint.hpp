/**
 * @file checkpoint.hpp
 * @brief Model checkpoints: `model.json` plus `weights.bin`.
 *
 * `weights.bin` holds every parameter as little-endian float64 in the order and
 * with the shapes listed under `parameters` in model.json, column-major within
 * each tensor.
 */
#pragma once

#include "stonet/json_io.hpp"
#include "stonet/operator_model.hpp"

#include <filesystem>

namespace stonet {

void save_checkpoint(const std::filesystem::path& dir, const OperatorModel& model,
                     const Json& optimizer_meta = Json::object());

OperatorModel load_checkpoint(const std::filesystem::path& dir);

} // namespace stonet
