/**
 * @file pipeline.hpp
 * @brief End-to-end orchestration: scenarios, simulations, dataset, sweep,
 *        final training, evaluation and the acceptance summary.
 *
 * Layout of a run directory:
 *   meta.json            configuration, base seed and tool version
 *   sims/scenario_NNNNN  one snapshot directory per scenario
 *   dataset/             manifest.json, stats.json, records.bin
 *   sweep/               sweep.csv, losses/<hash>.csv
 *   model/               model.json, weights.bin, loss.csv
 *   eval/                metrics.json, metrics.csv, histograms.csv, plot_errors.gp
 *   timing.json          wall-clock measurements (not deterministic)
 *   summary.json, summary.txt, digest.json
 */
#pragma once

#include "stonet/dataset.hpp"
#include "stonet/grid.hpp"
#include "stonet/json_io.hpp"
#include "stonet/simulation.hpp"
#include "stonet/sweep.hpp"
#include "stonet/train.hpp"
#include "stonet/verify/acceptance_checks.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stonet {

/// Derived seed for a pipeline stage, so every stage depends on the base seed only.
std::uint64_t stage_seed(std::uint64_t base_seed, const std::string& stage);

struct BatchTiming {
    std::vector<double> seconds;  // per scenario
    double mean() const;
};

/// Generates and simulates scenarios first..first+count-1 into dir/scenario_NNNNN.
std::vector<std::filesystem::path> simulate_batch(const std::filesystem::path& dir, std::uint64_t base_seed,
                                                  std::uint64_t first, std::uint64_t count, const Grid& grid,
                                                  const SolverConfig& solver, int jobs, BatchTiming* timing = nullptr,
                                                  const Json& extra_meta = Json::object());

struct ReproConfig {
    std::uint64_t base_seed = 1;
    std::string grid = "35x25";
    int train_scenarios = 40;
    int test_scenarios = 5;
    SolverConfig solver;
    DatasetConfig dataset;
    SweepSpec sweep;
    TrainConfig final_train;
    bool run_sweep = true;
    bool run_checks = true;
    int jobs = 1;
    /// A previous run directory to compare against for the determinism criterion.
    std::filesystem::path reference;

    /// The desk-scale defaults documented in the README.
    static ReproConfig desk(std::uint64_t base_seed);
    Json to_json() const;
    static ReproConfig from_json(const Json& j);
};

struct ReproSummary {
    std::vector<verify::CriterionResult> criteria;
    bool all_passed() const;
};

/// Runs the whole pipeline into `out`. Progress lines go to `log` when non-null.
ReproSummary run_repro(const std::filesystem::path& out, const ReproConfig& config, std::ostream* log = nullptr);

/// Files whose bytes must be identical between runs with the same seed,
/// relative to the run directory and sorted.
std::vector<std::filesystem::path> deterministic_artifacts(const std::filesystem::path& run_dir);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

} // namespace stonet
