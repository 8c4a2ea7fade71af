/**
 * @file test_dataset.cpp
 * @brief Rate targets, importance sampling, record layout, normalization and
 *        the on-disk dataset format.
 */
#include "stonet/dataset.hpp"
#include "stonet/error.hpp"
#include "stonet/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace stonet;
namespace fs = std::filesystem;

namespace {

StoredSimulation synthetic_simulation(const Grid& grid, std::uint64_t index, int snapshots)
{
    StoredSimulation s;
    s.grid = grid;
    s.params = sample_scenario(5, index);
    s.permeability = PermeabilityField::uniform(static_cast<std::size_t>(grid.quad_count()), 5.7e-11);
    CounterRng rng{index, 99};
    for (int k = 0; k < snapshots; ++k) {
        s.series.times_h.push_back(4.0 * k);
        Eigen::VectorXd c(grid.node_count());
        for (int n = 0; n < c.size(); ++n)
            c[n] = k == 0 ? 0.0 : rng.uniform();
        s.series.c.push_back(c);
    }
    return s;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("stonet_unit_" + name);
    fs::remove_all(p);
    return p;
}

Dataset small_dataset()
{
    const Grid grid(10, 8);
    DatasetConfig cfg;
    cfg.n_dense = 20;
    cfg.n_uniform = 10;
    cfg.seed = 4;
    Dataset ds;
    for (std::uint64_t i = 0; i < 3; ++i)
        build_records(synthetic_simulation(grid, i, 4), i, cfg, ds.records);
    ds.manifest.config = cfg;
    ds.manifest.train_ids = {0, 1, 2};
    ds.manifest.test_ids = {7};
    ds.manifest.branch_dim = 4;
    ds.manifest.stride = record_stride(4);
    ds.manifest.record_count = ds.records.size() / static_cast<std::size_t>(ds.manifest.stride);
    ds.manifest.grid_spec = grid.spec();
    ds.manifest.snapshots = 4;
    ds.stats = compute_stats(ds.records, 4);
    return ds;
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("backward-difference rates")
{
    TimeSeries ts;
    ts.times_h = {0.0, 4.0};
    ts.c = {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Constant(3, 0.2)};
    const auto r = concentration_rate(ts);
    REQUIRE(r.size() == 1u);
    CHECK(r[0][1] == doctest::Approx(0.05));

    ts.c[1] = ts.c[0];
    CHECK(concentration_rate(ts)[0].cwiseAbs().maxCoeff() == 0.0);

    ts.times_h.pop_back();
    ts.c.pop_back();
    CHECK_THROWS_AS(concentration_rate(ts), Error);
}

TEST_CASE("sampler returns distinct sorted nodes and rejects oversized requests")
{
    const Eigen::VectorXd c = Eigen::VectorXd::Zero(50);
    CounterRng d{1, 2}, u{1, 3};
    const auto idx = importance_sample(c, 20, 10, d, u);
    REQUIRE(idx.size() == 30u);
    for (std::size_t i = 1; i < idx.size(); ++i)
        CHECK(idx[i - 1] < idx[i]);
    CHECK_THROWS_AS(importance_sample(c, 40, 11, d, u), Error);
}

TEST_CASE("with zero concentration the weighted part is uniform (chi-square)")
{
    const int n = 50, draws = 100, take = 10;
    const Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    std::vector<int> counts(n, 0);
    for (int t = 0; t < draws; ++t) {
        CounterRng d{7, static_cast<std::uint64_t>(t), 1}, u{7, static_cast<std::uint64_t>(t), 2};
        for (int i : importance_sample(c, take, 0, d, u))
            ++counts[static_cast<std::size_t>(i)];
    }
    const double expected = static_cast<double>(draws) * take / n;
    double chi2 = 0.0;
    for (int k : counts)
        chi2 += (k - expected) * (k - expected) / expected;
    // Upper 1% point of chi-square with 49 degrees of freedom.
    CHECK(chi2 < 74.92);
}

TEST_CASE("concentrated nodes are almost always selected")
{
    const int n = 3621;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    const std::vector<int> hot{5, 100, 700, 1200, 1800, 2222, 2900, 3000, 3333, 3600};
    for (int h : hot)
        c[h] = 1.0;
    int hits = 0, total = 0;
    for (int t = 0; t < 200; ++t) {
        CounterRng d{11, static_cast<std::uint64_t>(t), 1}, u{11, static_cast<std::uint64_t>(t), 2};
        const auto idx = importance_sample(c, 100, 50, d, u);
        for (int h : hot) {
            hits += std::binary_search(idx.begin(), idx.end(), h) ? 1 : 0;
            ++total;
        }
    }
    CHECK(static_cast<double>(hits) / total > 0.99);
}

TEST_CASE("desk-scale record count and record layout")
{
    const Grid grid(70, 50);
    const DatasetConfig cfg;
    std::vector<double> records;
    StoredSimulation first;
    for (std::uint64_t i = 0; i < 40; ++i) {
        StoredSimulation s = synthetic_simulation(grid, i, 10);
        build_records(s, i, cfg, records);
        if (i == 0)
            first = std::move(s);
    }
    const auto stride = static_cast<std::size_t>(record_stride(4));
    CHECK(stride == 9u);
    CHECK(records.size() / stride == 540000u);

    // First record: scenario 0, target snapshot 1, state from snapshot 0.
    const double* r = records.data();
    CHECK(r[0] == doctest::Approx(5.7e-11));
    CHECK(r[1] == doctest::Approx(5.7e-11));
    CHECK(std::abs(r[2]) < 1e-25);
    CHECK(r[3] == first.params.delta_p());
    CHECK(r[6] == 4.0);
    const int node = grid.node(static_cast<int>(std::lround(r[4] / grid.dx())),
                               static_cast<int>(std::lround(r[5] / grid.dy())));
    CHECK(r[7] == first.series.c[0][node]);
    CHECK(r[8] == doctest::Approx((first.series.c[1][node] - first.series.c[0][node]) / 4.0));
}

TEST_CASE("delta p feature for the lowest right-wall offset")
{
    ScenarioParams p;
    p.p_right_offset = 4976.0;
    CHECK(p.delta_p() == 20.0);
}

TEST_CASE("normalization round trip and guarded constant columns")
{
    const Dataset ds = small_dataset();
    const std::vector<std::size_t> idx{0, 3, 17, 42};
    const Eigen::MatrixXd b = ds.branch_block(idx);
    const Eigen::MatrixXd t = ds.trunk_block(idx);
    CHECK((ds.stats.denormalize_branch(ds.stats.normalize_branch(b)) - b).cwiseAbs().maxCoeff() <=
          1e-12 * b.cwiseAbs().maxCoeff());
    CHECK((ds.stats.denormalize_trunk(ds.stats.normalize_trunk(t)) - t).cwiseAbs().maxCoeff() < 1e-12);
    const double y = ds.target_block(idx)[2];
    CHECK(ds.stats.denormalize_target(ds.stats.normalize_target(y)) == doctest::Approx(y));
    // Uniform permeability makes kxx constant; the guard keeps the transform finite.
    CHECK(ds.stats.normalize_branch(b).allFinite());
}

TEST_CASE("write then read gives identical records")
{
    const Dataset ds = small_dataset();
    const fs::path dir = scratch("roundtrip");
    write_dataset(ds, dir);
    const Dataset back = read_dataset(dir);
    CHECK(back.records == ds.records);
    CHECK(back.manifest.record_count == ds.manifest.record_count);
    CHECK(back.manifest.train_ids == ds.manifest.train_ids);
    CHECK(back.stats.branch_mean == ds.stats.branch_mean);
    CHECK(back.stats.target_std == ds.stats.target_std);
    fs::remove_all(dir);
}

TEST_CASE("truncated records file is a format error naming the offset")
{
    const Dataset ds = small_dataset();
    const fs::path dir = scratch("truncated");
    write_dataset(ds, dir);
    fs::resize_file(dir / "records.bin", fs::file_size(dir / "records.bin") - 5);
    try {
        (void)read_dataset(dir);
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("manifest without stats is rejected")
{
    const Dataset ds = small_dataset();
    const fs::path dir = scratch("nostats");
    write_dataset(ds, dir);
    Json m = read_json(dir / "manifest.json");
    m.erase("stats");
    write_json(dir / "manifest.json", m);
    CHECK_THROWS_AS(read_dataset(dir), Error);
    fs::remove_all(dir);
}

TEST_CASE("build from simulations: split disjointness and count")
{
    const fs::path dir = scratch("sims");
    const auto dirs = simulate_batch(dir, 3, 0, 2, Grid(10, 8), SolverConfig{}, 1);
    DatasetConfig cfg;
    cfg.n_dense = 20;
    cfg.n_uniform = 10;
    const Dataset ds = build_dataset(dirs, {9}, cfg);
    CHECK(ds.size() == 2u * 9u * 30u);
    CHECK(ds.manifest.train_ids == std::vector<std::uint64_t>{0, 1});
    CHECK_THROWS_AS(build_dataset(dirs, {1}, cfg), Error);
    CHECK_THROWS(build_dataset({}, {}, cfg));
    cfg.redraw_per_epoch = true;
    CHECK_THROWS(cfg.validate());
    fs::remove_all(dir);
}

}
