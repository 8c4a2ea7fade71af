#include "stonet/dataset.hpp"

#include "stonet/error.hpp"
#include "stonet/fem.hpp"
#include "stonet/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace stonet {

namespace fs = std::filesystem;

void DatasetConfig::validate() const
{
    if (n_dense < 0 || n_uniform < 0 || n_dense + n_uniform == 0)
        throw ConfigError("dataset: point counts must be non-negative with a positive total");
    if (!(weight_floor > 0.0))
        throw ConfigError("dataset: weight floor must be positive");
    if (redraw_per_epoch)
        throw ConfigError("dataset: redraw_per_epoch is not implemented; points are fixed at build time");
}

namespace {

Eigen::MatrixXd scale_columns(const Eigen::MatrixXd& m, const Eigen::VectorXd& mean, const Eigen::VectorXd& std,
                              bool forward)
{
    if (m.cols() != mean.size())
        throw ShapeError("normalization expects " + std::to_string(mean.size()) + " columns, got " +
                         std::to_string(m.cols()));
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (forward)
            out.col(j) = (m.col(j).array() - mean[j]) / std[j];
        else
            out.col(j) = m.col(j).array() * std[j] + mean[j];
    }
    return out;
}

Json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const Json& j)
{
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

Eigen::MatrixXd NormalizationStats::normalize_branch(const Eigen::MatrixXd& raw) const
{
    return scale_columns(raw, branch_mean, branch_std, true);
}
Eigen::MatrixXd NormalizationStats::normalize_trunk(const Eigen::MatrixXd& raw) const
{
    return scale_columns(raw, trunk_mean, trunk_std, true);
}
Eigen::MatrixXd NormalizationStats::denormalize_branch(const Eigen::MatrixXd& z) const
{
    return scale_columns(z, branch_mean, branch_std, false);
}
Eigen::MatrixXd NormalizationStats::denormalize_trunk(const Eigen::MatrixXd& z) const
{
    return scale_columns(z, trunk_mean, trunk_std, false);
}

Json NormalizationStats::to_json() const
{
    return {{"branch_mean", vec_json(branch_mean)}, {"branch_std", vec_json(branch_std)},
            {"trunk_mean", vec_json(trunk_mean)},   {"trunk_std", vec_json(trunk_std)},
            {"target_mean", target_mean},           {"target_std", target_std}};
}

NormalizationStats NormalizationStats::from_json(const Json& j)
{
    reject_unknown_keys(j, {"branch_mean", "branch_std", "trunk_mean", "trunk_std", "target_mean", "target_std"},
                        "stats");
    NormalizationStats s;
    s.branch_mean = json_vec(j.at("branch_mean"));
    s.branch_std = json_vec(j.at("branch_std"));
    s.trunk_mean = json_vec(j.at("trunk_mean"));
    s.trunk_std = json_vec(j.at("trunk_std"));
    s.target_mean = j.at("target_mean").get<double>();
    s.target_std = j.at("target_std").get<double>();
    if (s.branch_mean.size() != s.branch_std.size() || s.trunk_mean.size() != kTrunkDim ||
        s.trunk_std.size() != kTrunkDim)
        throw FormatError("stats: inconsistent feature dimensions");
    if ((s.branch_std.array() <= 0.0).any() || (s.trunk_std.array() <= 0.0).any() || !(s.target_std > 0.0))
        throw FormatError("stats: standard deviations must be positive");
    return s;
}

namespace {

Json layout_json(int branch)
{
    Json cols = {"kxx_m2", "kyy_m2", "kxy_m2", "dp_pa"};
    if (branch == 6) {
        cols.push_back("vx_m_per_s");
        cols.push_back("vy_m_per_s");
    }
    for (const char* c : {"x_m", "y_m", "t_h", "c_now", "target_per_h"})
        cols.push_back(c);
    return {{"encoding", "little-endian float64, row-major"}, {"columns", cols}};
}

} // namespace

Json DatasetManifest::to_json() const
{
    return {
        {"tool_version", kToolVersion},
        {"train_ids", train_ids},
        {"test_ids", test_ids},
        {"n_dense", config.n_dense},
        {"n_uniform", config.n_uniform},
        {"points_per_snapshot", config.points_per_snapshot()},
        {"seed", config.seed},
        {"with_velocity", config.with_velocity},
        {"weight_floor", config.weight_floor},
        {"branch_dim", branch_dim},
        {"stride", stride},
        {"record_count", record_count},
        {"grid", grid_spec},
        {"snapshots", snapshots},
        {"layout", layout_json(branch_dim)},
        {"stats", "stats.json"},
        {"records", "records.bin"},
    };
}


DatasetManifest DatasetManifest::from_json(const Json& j)
{
    reject_unknown_keys(j, {"tool_version", "train_ids", "test_ids", "n_dense", "n_uniform", "points_per_snapshot",
                            "seed", "with_velocity", "weight_floor", "branch_dim", "stride", "record_count", "grid",
                            "snapshots", "layout", "stats", "records"},
                        "manifest");
    for (const char* key : {"stats", "records", "stride", "record_count", "branch_dim"})
        if (!j.contains(key))
            throw FormatError(std::string("manifest: missing '") + key + "'");
    DatasetManifest m;
    m.train_ids = j.at("train_ids").get<std::vector<std::uint64_t>>();
    m.test_ids = j.at("test_ids").get<std::vector<std::uint64_t>>();
    m.config.n_dense = j.at("n_dense").get<int>();
    m.config.n_uniform = j.at("n_uniform").get<int>();
    m.config.seed = j.at("seed").get<std::uint64_t>();
    m.config.with_velocity = j.at("with_velocity").get<bool>();
    m.config.weight_floor = j.value("weight_floor", 1e-3);
    m.branch_dim = j.at("branch_dim").get<int>();
    m.stride = j.at("stride").get<int>();
    m.record_count = j.at("record_count").get<std::size_t>();
    m.grid_spec = j.value("grid", std::string{});
    m.snapshots = j.value("snapshots", 0);
    if (m.branch_dim != stonet::branch_dim(m.config.with_velocity) || m.stride != record_stride(m.branch_dim))
        throw FormatError("manifest: stride " + std::to_string(m.stride) + " does not match the feature layout");
    return m;
}

Eigen::MatrixXd Dataset::branch_block(const std::vector<std::size_t>& idx) const
{
    const int nb = manifest.branch_dim;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), nb);
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (int j = 0; j < nb; ++j)
            out(static_cast<Eigen::Index>(r), j) = row(idx[r])[j];
    return out;
}

Eigen::MatrixXd Dataset::trunk_block(const std::vector<std::size_t>& idx) const
{
    const int nb = manifest.branch_dim;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), kTrunkDim);
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (int j = 0; j < kTrunkDim; ++j)
            out(static_cast<Eigen::Index>(r), j) = row(idx[r])[nb + j];
    return out;
}

Eigen::VectorXd Dataset::target_block(const std::vector<std::size_t>& idx) const
{
    const int col = manifest.stride - 1;
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r)
        out[static_cast<Eigen::Index>(r)] = row(idx[r])[col];
    return out;
}

std::vector<Eigen::VectorXd> concentration_rate(const TimeSeries& series)
{
    if (series.size() < 2)
        throw Error("concentration_rate: at least two snapshots are required");
    std::vector<Eigen::VectorXd> rates;
    rates.reserve(series.size() - 1);
    for (std::size_t k = 1; k < series.size(); ++k) {
        const double dt = series.times_h[k] - series.times_h[k - 1];
        if (!(dt > 0.0))
            throw Error("concentration_rate: snapshot times must increase");
        rates.push_back((series.c[k] - series.c[k - 1]) / dt);
    }
    return rates;
}

std::vector<int> importance_sample(const Eigen::VectorXd& c, int n_dense, int n_uniform, CounterRng& dense_rng,
                                   CounterRng& uniform_rng, double weight_floor)
{
    const int n = static_cast<int>(c.size());
    if (n_dense < 0 || n_uniform < 0 || n_dense + n_uniform > n)
        throw Error("importance_sample: requested " + std::to_string(n_dense + n_uniform) + " points from " +
                    std::to_string(n) + " nodes");

    // Weighted sampling without replacement: keep the n_dense largest log(u)/w.
    std::vector<std::pair<double, int>> keys(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double w = std::max(c[i], 0.0) + weight_floor;
        const double u = 1.0 - dense_rng.uniform();  // (0, 1]
        keys[static_cast<std::size_t>(i)] = {std::log(u) / w, i};
    }
    std::partial_sort(keys.begin(), keys.begin() + n_dense, keys.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });

    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(n_dense + n_uniform));
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (int r = 0; r < n_dense; ++r) {
        chosen.push_back(keys[static_cast<std::size_t>(r)].second);
        taken[static_cast<std::size_t>(keys[static_cast<std::size_t>(r)].second)] = 1;
    }

    std::vector<int> rest;
    rest.reserve(static_cast<std::size_t>(n - n_dense));
    for (int i = 0; i < n; ++i)
        if (!taken[static_cast<std::size_t>(i)])
            rest.push_back(i);
    for (int r = 0; r < n_uniform; ++r) {
        const auto m = rest.size() - static_cast<std::size_t>(r);
        const auto pick = static_cast<std::size_t>(r) + uniform_rng.below(m);
        std::swap(rest[static_cast<std::size_t>(r)], rest[pick]);
        chosen.push_back(rest[static_cast<std::size_t>(r)]);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

Eigen::MatrixXd nodal_permeability(const PermeabilityField& k, const Grid& grid)
{
    const auto nq = static_cast<std::size_t>(grid.quad_count());
    if (k.size() != nq)
        throw ShapeError("permeability field has " + std::to_string(k.size()) + " points, grid has " +
                         std::to_string(nq));
    Eigen::MatrixXd per_point(grid.quad_count(), 3);
    for (std::size_t q = 0; q < nq; ++q) {
        const auto r = static_cast<Eigen::Index>(q);
        per_point(r, 0) = k.kxx[q];
        per_point(r, 1) = k.kyy[q];
        per_point(r, 2) = k.kxy[q];
    }
    return quadrature_to_nodes(grid, per_point);
}

void build_records(const StoredSimulation& sim, std::uint64_t scenario_id, const DatasetConfig& config,
                   std::vector<double>& out)
{
    const Grid& grid = sim.grid;
    const auto rates = concentration_rate(sim.series);
    const Eigen::MatrixXd k_nodes = nodal_permeability(sim.permeability, grid);
    const double dp = sim.params.delta_p();
    const int nb = branch_dim(config.with_velocity);
    const int stride = record_stride(nb);
    if (config.with_velocity && sim.series.v.size() != sim.series.size())
        throw Error("build_records: velocity features requested but velocity snapshots are missing");

    for (std::size_t k = 1; k < sim.series.size(); ++k) {
        const Eigen::VectorXd& c_k = sim.series.c[k];
        CounterRng dense_rng{config.seed, scenario_id, static_cast<std::uint64_t>(k),
                             static_cast<std::uint64_t>(RngTag::ImportanceSample)};
        CounterRng uniform_rng{config.seed, scenario_id, static_cast<std::uint64_t>(k),
                               static_cast<std::uint64_t>(RngTag::UniformSample)};
        const auto nodes =
            importance_sample(c_k, config.n_dense, config.n_uniform, dense_rng, uniform_rng, config.weight_floor);

        Eigen::MatrixXd v_nodes;
        if (config.with_velocity) {
            Eigen::MatrixXd per_point(grid.quad_count(), 2);
            for (int q = 0; q < grid.quad_count(); ++q) {
                per_point(q, 0) = sim.series.v[k - 1][2 * q];
                per_point(q, 1) = sim.series.v[k - 1][2 * q + 1];
            }
            v_nodes = quadrature_to_nodes(grid, per_point);
        }

        for (int node : nodes) {
            const std::size_t base = out.size();
            out.resize(base + static_cast<std::size_t>(stride));
            double* r = out.data() + base;
            r[0] = k_nodes(node, 0);
            r[1] = k_nodes(node, 1);
            r[2] = k_nodes(node, 2);
            r[3] = dp;
            if (config.with_velocity) {
                r[4] = v_nodes(node, 0);
                r[5] = v_nodes(node, 1);
            }
            const Point2 p = grid.node_point(node);
            r[nb] = p.x;
            r[nb + 1] = p.y;
            r[nb + 2] = sim.series.times_h[k];
            r[nb + 3] = sim.series.c[k - 1][node];
            r[nb + 4] = rates[k - 1][node];
        }
    }
}

NormalizationStats compute_stats(const std::vector<double>& records, int nb)
{
    const int stride = record_stride(nb);
    const std::size_t n = records.size() / static_cast<std::size_t>(stride);
    if (n == 0)
        throw Error("compute_stats: no records");
    const int cols = nb + kTrunkDim + 2;
    std::vector<double> mean(static_cast<std::size_t>(cols), 0.0), m2(static_cast<std::size_t>(cols), 0.0);
    // Welford accumulation per column, record order fixed.
    for (std::size_t i = 0; i < n; ++i) {
        const double* r = records.data() + i * static_cast<std::size_t>(stride);
        for (int j = 0; j < cols; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            const double d = r[j] - mean[jj];
            mean[jj] += d / static_cast<double>(i + 1);
            m2[jj] += d * (r[j] - mean[jj]);
        }
    }
    auto sd = [&](int j) {
        return std::max(std::sqrt(m2[static_cast<std::size_t>(j)] / static_cast<double>(n)), NormalizationStats::kStdGuard);
    };
    NormalizationStats s;
    s.branch_mean.resize(nb);
    s.branch_std.resize(nb);
    for (int j = 0; j < nb; ++j) {
        s.branch_mean[j] = mean[static_cast<std::size_t>(j)];
        s.branch_std[j] = sd(j);
    }
    s.trunk_mean.resize(kTrunkDim);
    s.trunk_std.resize(kTrunkDim);
    for (int j = 0; j < kTrunkDim; ++j) {
        s.trunk_mean[j] = mean[static_cast<std::size_t>(nb + j)];
        s.trunk_std[j] = sd(nb + j);
    }
    s.target_mean = mean[static_cast<std::size_t>(nb + kTrunkDim + 1)];
    s.target_std = sd(nb + kTrunkDim + 1);
    return s;
}

Dataset build_dataset(const std::vector<fs::path>& train_dirs, const std::vector<std::uint64_t>& test_ids,
                      const DatasetConfig& config, int jobs)
{
    config.validate();
    if (train_dirs.empty())
        throw Error("build_dataset: no training scenarios");

    std::vector<std::vector<double>> parts(train_dirs.size());
    std::vector<std::uint64_t> ids(train_dirs.size());
    std::vector<std::string> grids(train_dirs.size());
    std::vector<int> snapshots(train_dirs.size());
    parallel_for(train_dirs.size(), jobs, [&](std::size_t s) {
        const StoredSimulation sim = read_simulation(train_dirs[s], config.with_velocity);
        ids[s] = sim.params.index;
        grids[s] = sim.grid.spec();
        snapshots[s] = static_cast<int>(sim.series.size());
        build_records(sim, sim.params.index, config, parts[s]);
    });

    const std::set<std::uint64_t> train_set(ids.begin(), ids.end());
    if (train_set.size() != ids.size())
        throw Error("build_dataset: duplicate training scenario ids");
    for (auto id : test_ids)
        if (train_set.count(id))
            throw Error("build_dataset: scenario " + std::to_string(id) + " is in both train and test splits");
    for (const auto& g : grids)
        if (g != grids.front())
            throw Error("build_dataset: training scenarios use different grids");

    Dataset ds;
    ds.manifest.train_ids = ids;
    ds.manifest.test_ids = test_ids;
    ds.manifest.config = config;
    ds.manifest.branch_dim = branch_dim(config.with_velocity);
    ds.manifest.stride = record_stride(ds.manifest.branch_dim);
    ds.manifest.grid_spec = grids.front();
    ds.manifest.snapshots = snapshots.front();
    std::size_t total = 0;
    for (const auto& p : parts)
        total += p.size();
    ds.records.reserve(total);
    for (const auto& p : parts)
        ds.records.insert(ds.records.end(), p.begin(), p.end());
    ds.manifest.record_count = ds.size();
    ds.stats = compute_stats(ds.records, ds.manifest.branch_dim);
    return ds;
}

void write_dataset(const Dataset& dataset, const fs::path& dir)
{
    if (dataset.records.empty())
        throw Error("write_dataset: no records");
    if (dataset.records.size() != dataset.manifest.record_count * static_cast<std::size_t>(dataset.manifest.stride))
        throw Error("write_dataset: record buffer does not match the manifest");
    fs::create_directories(dir);
    write_f64(dir / "records.bin", dataset.records);
    write_json(dir / "stats.json", dataset.stats.to_json());
    write_json(dir / "manifest.json", dataset.manifest.to_json());
}

Dataset read_dataset(const fs::path& dir)
{
    Dataset ds;
    ds.manifest = DatasetManifest::from_json(read_json(dir / "manifest.json"));
    ds.stats = NormalizationStats::from_json(read_json(dir / "stats.json"));
    if (ds.stats.branch_dim() != ds.manifest.branch_dim)
        throw FormatError("stats.json branch dimension does not match manifest");
    ds.records = read_f64(dir / "records.bin", ds.manifest.record_count * static_cast<std::size_t>(ds.manifest.stride));
    return ds;
}

} // namespace stonet
