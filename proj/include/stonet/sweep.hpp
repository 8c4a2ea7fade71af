/**
 * @file sweep.hpp
 * @brief Hyper-parameter grid over width, branch/trunk depth, root depth and block count.
 */
#pragma once

#include "stonet/dataset.hpp"
#include "stonet/operator_model.hpp"
#include "stonet/train.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace stonet {

struct SweepSpec {
    std::vector<Architecture> archs{Architecture::STONet, Architecture::EnDeepONet};
    std::vector<int> widths{50, 100};
    std::vector<int> depths{4, 8, 12};
    std::vector<int> roots{4, 8, 12};
    std::vector<int> blocks{4, 8};
    /// Applied to every entry; the model field is overwritten per entry.
    TrainConfig train;
    int final_window = 20;
    int jobs = 1;

    void validate() const;
    Json to_json() const;
    static SweepSpec from_json(const Json& j);
};

struct SweepEntry {
    OperatorConfig config;
    std::string hash;
    long params = 0;
    double final_loss = 0.0;
    double seconds = 0.0;
    std::string status = "ok";
    std::vector<double> loss_history;
};

/// Stable 16-hex-digit hash of a configuration's JSON encoding.
std::string config_hash(const OperatorConfig& config);

/// Every configuration of the grid. Architectures without blocks appear once
/// per (width, depth, root); DeepONet also ignores the root depth.
std::vector<OperatorConfig> enumerate_sweep(const SweepSpec& spec, int branch_inputs);

/// Trains each entry; failures are recorded in `status` and the sweep continues.
/// Result is sorted by (params, hash).
std::vector<SweepEntry> run_sweep(const SweepSpec& spec, const Dataset& dataset);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepEntry>& entries, int final_window);

/// Matched STONet / En-DeepONet pairs (same width, depth, root): fraction with
/// STONet final loss <= En-DeepONet's, and the number of pairs.
struct TrendSummary {
    int pairs = 0;
    int stonet_wins = 0;
    double fraction() const { return pairs ? static_cast<double>(stonet_wins) / pairs : 0.0; }
};
TrendSummary compare_architectures(const std::vector<SweepEntry>& entries);

} // namespace stonet
