#include "stonet/evaluate.hpp"

#include "stonet/dataset.hpp"
#include "stonet/error.hpp"
#include "stonet/rollout.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace stonet {

Histogram::Histogram() : Histogram(-8.0, 1.0, 36) {}

Histogram::Histogram(double lo, double hi, int n)
    : log10_lo(lo), log10_hi(hi), bins(n), counts(static_cast<std::size_t>(n + 2), 0)
{
}

void Histogram::add(double value)
{
    const double v = std::abs(value);
    if (!(v >= std::pow(10.0, log10_lo))) {
        ++counts.front();
        return;
    }
    const double pos = (std::log10(v) - log10_lo) / (log10_hi - log10_lo) * bins;
    if (pos >= bins) {
        ++counts.back();
        return;
    }
    ++counts[static_cast<std::size_t>(std::max(0, static_cast<int>(pos))) + 1];
}

long Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), 0L); }

Json Histogram::to_json() const
{
    return {{"log10_lo", log10_lo}, {"log10_hi", log10_hi}, {"bins", bins},
            {"layout", "[underflow, log-spaced bins..., overflow]"}, {"counts", counts}};
}

const SnapshotErrors& Metrics::at_time(double t_h) const
{
    for (const auto& s : c_by_time)
        if (std::abs(s.time_h - t_h) < 1e-9)
            return s;
    throw Error("metrics: no snapshot at t = " + std::to_string(t_h) + " h");
}

namespace {

Json snapshot_json(const std::vector<SnapshotErrors>& v)
{
    Json a = Json::array();
    for (const auto& s : v)
        a.push_back({{"time_h", s.time_h}, {"mean_abs", s.mean_abs}, {"mean_rel", s.mean_rel},
                     {"max_abs", s.max_abs}, {"denominator", s.denominator}});
    return a;
}

} // namespace

Json Metrics::to_json() const
{
    return {{"relative_error_definition",
             "|pred - true| / max(max_nodes |true(t)|, floor); floor 0.1 for c, 0.1/dt_h for dc/dt"},
            {"scenarios", scenarios},
            {"nodes", nodes},
            {"snapshots", snapshots},
            {"mean_relative_rollout_error", mean_rel_rollout},
            {"mean_absolute_rollout_error", mean_abs_rollout},
            {"rollout_c_min", c_min},
            {"rollout_c_max", c_max},
            {"rollout_out_of_range", out_of_range},
            {"c_by_time", snapshot_json(c_by_time)},
            {"rate_by_time", snapshot_json(rate_by_time)},
            {"histograms",
             {{"c_abs", c_abs.to_json()},
              {"c_rel", c_rel.to_json()},
              {"rate_abs", rate_abs.to_json()},
              {"rate_rel", rate_rel.to_json()}}}};
}

Metrics evaluate(const RateModel& model, const std::vector<StoredSimulation>& test, const EvalConfig& config)
{
    if (test.empty())
        throw Error("evaluate: no test simulations");
    Metrics m;
    const std::vector<double>& times = test.front().series.times_h;
    const std::size_t K = times.size();
    if (K < 2)
        throw Error("evaluate: at least two snapshots are required");
    m.scenarios = static_cast<int>(test.size());
    m.nodes = test.front().grid.node_count();
    m.snapshots = static_cast<int>(K);
    m.c_by_time.resize(K);
    m.rate_by_time.resize(K - 1);
    for (std::size_t k = 0; k < K; ++k)
        m.c_by_time[k].time_h = times[k];
    for (std::size_t k = 1; k < K; ++k)
        m.rate_by_time[k - 1].time_h = times[k];

    const double per_snapshot = static_cast<double>(test.size()) * m.nodes;
    for (const auto& sim : test) {
        if (sim.series.times_h != times)
            throw Error("evaluate: test simulations have different snapshot times");
        if (sim.grid.node_count() != m.nodes)
            throw Error("evaluate: test simulations use different grids");
        const BranchProvider branch = node_branch_features(sim, config.with_velocity);
        const RolloutResult r = rollout(model, sim.series.c.front(), branch, sim.grid, times);
        m.c_min = std::min(m.c_min, r.c_min);
        m.c_max = std::max(m.c_max, r.c_max);
        m.out_of_range += r.out_of_range;

        for (std::size_t k = 0; k < K; ++k) {
            const Eigen::VectorXd err = (r.c[k] - sim.series.c[k]).cwiseAbs();
            const double denom = std::max(sim.series.c[k].cwiseAbs().maxCoeff(), config.c_floor);
            auto& s = m.c_by_time[k];
            s.mean_abs += err.sum() / per_snapshot;
            s.mean_rel += err.sum() / denom / per_snapshot;
            s.max_abs = std::max(s.max_abs, err.maxCoeff());
            s.denominator += denom / static_cast<double>(test.size());
            for (Eigen::Index i = 0; i < err.size(); ++i) {
                m.c_abs.add(err[i]);
                m.c_rel.add(err[i] / denom);
            }
        }

        const auto true_rates = concentration_rate(sim.series);
        for (std::size_t k = 1; k < K; ++k) {
            const double dt = times[k] - times[k - 1];
            const Eigen::VectorXd pred = model.rates(branch(k), node_trunk_features(sim.grid, times[k]));
            const Eigen::VectorXd err = (pred - true_rates[k - 1]).cwiseAbs();
            const double denom = std::max(true_rates[k - 1].cwiseAbs().maxCoeff(), config.c_floor / dt);
            auto& s = m.rate_by_time[k - 1];
            s.mean_abs += err.sum() / per_snapshot;
            s.mean_rel += err.sum() / denom / per_snapshot;
            s.max_abs = std::max(s.max_abs, err.maxCoeff());
            s.denominator += denom / static_cast<double>(test.size());
            for (Eigen::Index i = 0; i < err.size(); ++i) {
                m.rate_abs.add(err[i]);
                m.rate_rel.add(err[i] / denom);
            }
        }
    }
    for (std::size_t k = 1; k < K; ++k) {
        m.mean_rel_rollout += m.c_by_time[k].mean_rel / static_cast<double>(K - 1);
        m.mean_abs_rollout += m.c_by_time[k].mean_abs / static_cast<double>(K - 1);
    }
    return m;
}

void write_metrics(const std::filesystem::path& dir, const Metrics& metrics)
{
    std::filesystem::create_directories(dir);
    write_json(dir / "metrics.json", metrics.to_json());

    std::ofstream csv(dir / "metrics.csv");
    if (!csv)
        throw Error("cannot write metrics.csv");
    csv << "# relative error = |pred - true| / max(max_nodes |true(t)|, floor); floor 0.1 for c, 0.1/dt_h for rate\n";
    csv << "time_h,c_mean_abs,c_mean_rel,c_max_abs,rate_mean_abs,rate_mean_rel,rate_max_abs\n";
    char buf[256];
    for (std::size_t k = 0; k < metrics.c_by_time.size(); ++k) {
        const auto& c = metrics.c_by_time[k];
        double ra = 0.0, rr = 0.0, rm = 0.0;
        if (k > 0) {
            ra = metrics.rate_by_time[k - 1].mean_abs;
            rr = metrics.rate_by_time[k - 1].mean_rel;
            rm = metrics.rate_by_time[k - 1].max_abs;
        }
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", c.time_h, c.mean_abs,
                      c.mean_rel, c.max_abs, ra, rr, rm);
        csv << buf;
    }

    std::ofstream hist(dir / "histograms.csv");
    if (!hist)
        throw Error("cannot write histograms.csv");
    hist << "bin,lower,upper,c_abs,c_rel,rate_abs,rate_rel\n";
    const Histogram& h = metrics.c_abs;
    for (int b = 0; b < h.bins + 2; ++b) {
        const double width = (h.log10_hi - h.log10_lo) / h.bins;
        const double lo = b == 0 ? 0.0 : std::pow(10.0, h.log10_lo + (b - 1) * width);
        const double hi = b == h.bins + 1 ? INFINITY : std::pow(10.0, h.log10_lo + b * width);
        const auto i = static_cast<std::size_t>(b);
        std::snprintf(buf, sizeof buf, "%d,%.6g,%.6g,%ld,%ld,%ld,%ld\n", b, lo, hi, metrics.c_abs.counts[i],
                      metrics.c_rel.counts[i], metrics.rate_abs.counts[i], metrics.rate_rel.counts[i]);
        hist << buf;
    }
}

} // namespace stonet
