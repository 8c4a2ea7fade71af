/**
 * @file evaluate.hpp
 * @brief Rollout and one-step error metrics on held-out simulations.
 *
 * Relative error of c at snapshot k: |c_hat - c| / max(max_nodes |c(t_k)|, 0.1).
 * Relative error of dc/dt at step k: |r_hat - r| / max(max_nodes |r(t_k)|, 0.1 / dt_h).
 */
#pragma once

#include "stonet/json_io.hpp"
#include "stonet/operator_model.hpp"
#include "stonet/snapshot_store.hpp"

#include <filesystem>
#include <vector>

namespace stonet {

/// Log-spaced bins between 10^lo and 10^hi plus an underflow bin (values
/// below 10^lo, including zero) and an overflow bin.
struct Histogram {
    double log10_lo = -8.0;
    double log10_hi = 1.0;
    int bins = 36;
    std::vector<long> counts;  // bins + 2: [underflow, bins..., overflow]

    Histogram();
    Histogram(double lo, double hi, int n);
    void add(double value);
    long total() const;
    Json to_json() const;
};

struct SnapshotErrors {
    double time_h = 0.0;
    double mean_abs = 0.0;
    double mean_rel = 0.0;
    double max_abs = 0.0;
    double denominator = 0.0;  // mean over scenarios
};

struct Metrics {
    std::vector<SnapshotErrors> c_by_time;     // every snapshot, t = 0 included
    std::vector<SnapshotErrors> rate_by_time;  // snapshots 1..K-1
    Histogram c_abs, c_rel, rate_abs, rate_rel;
    double mean_rel_rollout = 0.0;  // mean of c_by_time[k].mean_rel over k >= 1
    double mean_abs_rollout = 0.0;
    double c_min = 0.0, c_max = 0.0;
    long out_of_range = 0;
    int scenarios = 0;
    int nodes = 0;
    int snapshots = 0;

    /// c_by_time entry whose time equals t_h.
    const SnapshotErrors& at_time(double t_h) const;
    Json to_json() const;
};

struct EvalConfig {
    double c_floor = 0.1;
    bool with_velocity = false;
};

/// Rolls the model out from c(t=0) of each simulation and compares to the
/// stored snapshots. The model is not modified.
Metrics evaluate(const RateModel& model, const std::vector<StoredSimulation>& test, const EvalConfig& config = {});

/// metrics.json plus metrics.csv (per-time means) and histograms.csv.
void write_metrics(const std::filesystem::path& dir, const Metrics& metrics);

} // namespace stonet
