/**
 * @file dataset.hpp
 * @brief Training records built from simulated time series.
 *
 * A record is a flat row of `stride` doubles:
 *   [ u_0 .. u_{nb-1} | x, y, t | c_now | target ]
 * with u = (kxx, kyy, kxy, dp[, vx, vy]) at the query node, (x, y) in metres,
 * t in hours, c_now = c(t_{k-1}) and target = dc/dt(t_k) in 1/h.
 */
#pragma once

#include "stonet/grid.hpp"
#include "stonet/json_io.hpp"
#include "stonet/rng.hpp"
#include "stonet/snapshot_store.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace stonet {

inline constexpr int kTrunkDim = 3;

inline int branch_dim(bool with_velocity) { return with_velocity ? 6 : 4; }
inline int record_stride(int branch) { return branch + kTrunkDim + 2; }

struct DatasetConfig {
    int n_dense = 1000;
    int n_uniform = 500;
    std::uint64_t seed = 0;
    bool with_velocity = false;
    double weight_floor = 1e-3;
    /// Points are drawn once at build time; redrawing per epoch is not implemented.
    bool redraw_per_epoch = false;

    void validate() const;
    int points_per_snapshot() const { return n_dense + n_uniform; }
};

/// Per-column mean and standard deviation over the training split.
struct NormalizationStats {
    Eigen::VectorXd branch_mean, branch_std;
    Eigen::VectorXd trunk_mean, trunk_std;
    double target_mean = 0.0;
    double target_std = 1.0;

    static constexpr double kStdGuard = 1e-12;

    int branch_dim() const { return static_cast<int>(branch_mean.size()); }

    Eigen::MatrixXd normalize_branch(const Eigen::MatrixXd& raw) const;
    Eigen::MatrixXd normalize_trunk(const Eigen::MatrixXd& raw) const;
    Eigen::MatrixXd denormalize_branch(const Eigen::MatrixXd& z) const;
    Eigen::MatrixXd denormalize_trunk(const Eigen::MatrixXd& z) const;
    double normalize_target(double raw) const { return (raw - target_mean) / target_std; }
    double denormalize_target(double z) const { return target_mean + target_std * z; }

    Json to_json() const;
    static NormalizationStats from_json(const Json& j);
};

struct DatasetManifest {
    std::vector<std::uint64_t> train_ids;
    std::vector<std::uint64_t> test_ids;
    DatasetConfig config;
    int branch_dim = 4;
    int stride = 9;
    std::size_t record_count = 0;
    std::string grid_spec;
    int snapshots = 0;

    Json to_json() const;
    static DatasetManifest from_json(const Json& j);
};

struct Dataset {
    DatasetManifest manifest;
    NormalizationStats stats;
    std::vector<double> records;  // row-major, manifest.stride per record

    std::size_t size() const { return manifest.stride ? records.size() / static_cast<std::size_t>(manifest.stride) : 0; }
    const double* row(std::size_t i) const { return records.data() + i * static_cast<std::size_t>(manifest.stride); }
    double* row(std::size_t i) { return records.data() + i * static_cast<std::size_t>(manifest.stride); }

    /// Raw feature blocks of the given record indices.
    Eigen::MatrixXd branch_block(const std::vector<std::size_t>& idx) const;
    Eigen::MatrixXd trunk_block(const std::vector<std::size_t>& idx) const;
    Eigen::VectorXd target_block(const std::vector<std::size_t>& idx) const;
};

/// dc/dt at snapshots 1..K-1 (entry k-1 belongs to t_k), hours.
std::vector<Eigen::VectorXd> concentration_rate(const TimeSeries& series);

/// Node indices: n_dense weighted by c + floor without replacement, then
/// n_uniform uniformly from the remainder. Returned sorted ascending.
std::vector<int> importance_sample(const Eigen::VectorXd& c, int n_dense, int n_uniform,
                                   CounterRng& dense_rng, CounterRng& uniform_rng,
                                   double weight_floor = 1e-3);

/// Nodal (kxx, kyy, kxy) columns from the quadrature permeability.
Eigen::MatrixXd nodal_permeability(const PermeabilityField& k, const Grid& grid);

/// Appends the records of one scenario to `out`.
void build_records(const StoredSimulation& sim, std::uint64_t scenario_id, const DatasetConfig& config,
                   std::vector<double>& out);

NormalizationStats compute_stats(const std::vector<double>& records, int branch_dim);

/// Reads each training directory, builds and normalizes. Scenario ids come from meta.json.
Dataset build_dataset(const std::vector<std::filesystem::path>& train_dirs,
                      const std::vector<std::uint64_t>& test_ids, const DatasetConfig& config,
                      int jobs = 1);

void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

} // namespace stonet
