#include "stonet/verify/acceptance_checks.hpp"

#include "stonet/autodiff.hpp"
#include "stonet/error.hpp"
#include "stonet/pipeline.hpp"
#include "stonet/rng.hpp"
#include "stonet/rollout.hpp"
#include "stonet/simulation.hpp"
#include "stonet/snapshot_store.hpp"
#include "stonet/verify/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace stonet::verify {

namespace fs = std::filesystem;

std::string CriterionResult::line() const
{
    const char* status = !evaluated ? "SKIP" : (passed ? "PASS" : "FAIL");
    char head[160];
    std::snprintf(head, sizeof head, "[%s] %2d %-34s (%.1f s) ", status, id, name.c_str(), seconds);
    return head + detail;
}

namespace {

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c, d);
    return buf;
}

template <class Fn>
CriterionResult timed(int id, const std::string& name, double budget_s, Fn&& fn)
{
    CriterionResult r;
    r.id = id;
    r.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
        fn(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget_s > 0.0 && r.seconds > budget_s) {
        r.passed = false;
        r.detail += fmt("; runtime %.1f s exceeds budget %.0f s", r.seconds, budget_s);
    }
    return r;
}

constexpr std::uint64_t kCheckSeed = 20240611;

} // namespace

CriterionResult check_permeability_oracle()
{
    return timed(1, "permeability oracle", 10.0, [](CriterionResult& r) {
        const Grid grid(10, 10);
        const DeterministicParams det;
        const REVSpec rev;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 5; ++s) {
            const ScenarioParams params = sample_scenario(kCheckSeed, s);
            const FractureField f = sample_fractures(params, grid);
            const PermeabilityField fast = equivalent_permeability(f, grid, rev, det);
            const PermeabilityField slow = brute_force_permeability(f, grid, rev, det);
            for (std::size_t i = 0; i < fast.size(); ++i) {
                worst = std::max({worst, std::abs(fast.kxx[i] - slow.kxx[i]), std::abs(fast.kyy[i] - slow.kyy[i]),
                                  std::abs(fast.kxy[i] - slow.kxy[i])});
            }
        }
        r.passed = worst <= 1e-18;
        r.detail = fmt("max |k - k_oracle| = %.3e m^2 over 5 seeds (bound 1e-18)", worst);
    });
}

CriterionResult check_hydrostatic_no_flow()
{
    return timed(2, "hydrostatic no-flow", 30.0, [](CriterionResult& r) {
        const Grid grid(70, 50);
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 5; ++s)
            worst = std::max(worst, hydrostatic_max_velocity(generate_scenario(kCheckSeed, s, grid), grid));
        r.passed = worst < 1e-12;
        r.detail = fmt("max |v| = %.3e m/s over 5 realizations (bound 1e-12)", worst);
    });
}

CriterionResult check_pressure_convergence()
{
    return timed(3, "pressure convergence order", 120.0, [](CriterionResult& r) {
        const ConvergenceStudy s = pressure_convergence({35, 70, 140}, {25, 50, 100});
        r.passed = true;
        for (double o : s.order)
            r.passed = r.passed && std::abs(o - 2.0) <= 0.3;
        r.detail = fmt("L2 errors %.3e, %.3e, %.3e; ", s.l2_error[0], s.l2_error[1], s.l2_error[2]) +
                   fmt("orders %.3f, %.3f (target 2 +- 0.3)", s.order[0], s.order[1]);
    });
}

CriterionResult check_diffusion_oracle()
{
    return timed(4, "transport diffusion oracle", 60.0, [](CriterionResult& r) {
        const double err = diffusion_profile_error(Grid(70, 50), 4.0);
        r.passed = err <= 0.02;
        r.detail = fmt("relative L2 error vs erfc profile at 4 h = %.4f (bound 0.02)", err);
    });
}

CriterionResult check_solute_balance()
{
    return timed(5, "discrete solute balance", 120.0, [](CriterionResult& r) {
        const Grid grid(70, 50);
        const Scenario sc = generate_scenario(kCheckSeed, 0, grid);
        const TimeSeries ts = run_simulation(sc, grid);
        double worst = 0.0;
        for (const auto& d : ts.steps)
            worst = std::max(worst, d.balance_error);
        r.passed = worst <= 1e-8 && ts.steps.size() == 108;
        r.detail = fmt("max relative balance error %.3e over %.0f steps (bound 1e-8)", worst,
                       static_cast<double>(ts.steps.size()));
    });
}

CriterionResult check_bookkeeping()
{
    return timed(6, "simulation bookkeeping", 0.0, [](CriterionResult& r) {
        const Grid grid(70, 50);
        const SolverConfig cfg;
        const Scenario sc = generate_scenario(kCheckSeed, 1, grid);
        const TimeSeries ts = run_simulation(sc, grid, cfg);
        bool times_ok = ts.size() == 10;
        for (std::size_t k = 0; k < ts.size() && times_ok; ++k)
            times_ok = ts.times_h[k] == 4.0 * static_cast<double>(k);
        r.passed = grid.element_count() == 3500 && grid.node_count() == 3621 && grid.quad_count() == 14000 &&
                   cfg.steps() == 108 && ts.steps.size() == 108 && cfg.dt == 1200.0 && times_ok;
        std::ostringstream os;
        os << grid.element_count() << " elements, " << grid.node_count() << " nodes, " << ts.steps.size()
           << " steps of " << cfg.dt << " s, snapshots at";
        for (double t : ts.times_h)
            os << ' ' << t;
        os << " h";
        r.detail = os.str();
    });
}

GradientCheck gradient_check(const OperatorConfig& config, int samples, std::uint64_t seed, double h, int batch,
                             double abs_floor)
{
    OperatorModel model(config);
    CounterRng data_rng{seed, static_cast<std::uint64_t>(RngTag::Noise), 1};
    Matrix xb(batch, config.branch_inputs), xt(batch, config.trunk_inputs), y(batch, 1);
    for (Eigen::Index i = 0; i < xb.size(); ++i)
        xb.data()[i] = data_rng.normal();
    for (Eigen::Index i = 0; i < xt.size(); ++i)
        xt.data()[i] = data_rng.normal();
    for (Eigen::Index i = 0; i < y.size(); ++i)
        y.data()[i] = data_rng.normal();

    auto loss = [&]() {
        Tape tape;
        const Var l = tape.mse(model.forward(tape, tape.constant(xb), tape.constant(xt)), tape.constant(y));
        return tape.value(l)(0, 0);
    };

    model.zero_grad();
    {
        Tape tape;
        const Var l = tape.mse(model.forward(tape, tape.constant(xb), tape.constant(xt)), tape.constant(y));
        tape.backward(l);
    }

    const auto& params = model.parameters();
    const long total = model.parameter_count();
    CounterRng pick{seed, static_cast<std::uint64_t>(RngTag::UniformSample), 2};
    GradientCheck out;
    for (int s = 0; s < samples; ++s) {
        long flat = static_cast<long>(pick.below(static_cast<std::uint64_t>(total)));
        std::size_t p = 0;
        while (flat >= params[p]->size()) {
            flat -= params[p]->size();
            ++p;
        }
        double& w = params[p]->value.data()[flat];
        const double g = params[p]->grad.data()[flat];
        const double saved = w;
        w = saved + h;
        const double up = loss();
        w = saved - h;
        const double down = loss();
        w = saved;
        const double fd = (up - down) / (2.0 * h);
        const double abs_err = std::abs(g - fd);
        const double scale = std::max({std::abs(g), std::abs(fd), abs_floor});
        out.max_abs_error = std::max(out.max_abs_error, abs_err);
        out.max_relative_error = std::max(out.max_relative_error, scale > 0.0 ? abs_err / scale : 0.0);
        ++out.checked;
    }
    return out;
}

CriterionResult check_gradients()
{
    return timed(7, "gradient checks (width 16)", 60.0, [](CriterionResult& r) {
        r.passed = true;
        std::ostringstream os;
        for (Architecture arch : {Architecture::DeepONet, Architecture::EnDeepONet, Architecture::STONet}) {
            OperatorConfig c;
            c.arch = arch;
            c.width = 16;
            c.branch_depth = 3;
            c.trunk_depth = 3;
            c.root_depth = 2;
            c.blocks = 2;
            c.seed = kCheckSeed;
            const GradientCheck g = gradient_check(c, 50, kCheckSeed + static_cast<std::uint64_t>(arch));
            r.passed = r.passed && g.max_relative_error < 1e-6 && g.checked == 50;
            os << architecture_name(arch) << ' ' << fmt("%.2e", g.max_relative_error) << "; ";
        }
        r.detail = "max relative error over 50 parameters: " + os.str() + "bound 1e-6";
    });
}

CriterionResult check_rollout_identity()
{
    return timed(8, "rollout identity", 10.0, [](CriterionResult& r) {
        const Grid grid(70, 50);
        const Scenario sc = generate_scenario(kCheckSeed, 2, grid);
        const SolverConfig cfg;
        StoredSimulation sim;
        sim.grid = grid;
        sim.params = sc.params;
        sim.det = sc.det;
        sim.rev = sc.rev;
        sim.solver = cfg;
        sim.permeability = sc.permeability;
        sim.series = run_simulation(sc, grid, cfg);
        const TrueRateModel oracle(sim);
        const RolloutResult out =
            rollout(oracle, sim.series.c.front(), node_branch_features(sim, false), grid, sim.series.times_h);
        double worst = 0.0;
        for (std::size_t k = 0; k < out.c.size(); ++k)
            worst = std::max(worst, (out.c[k] - sim.series.c[k]).cwiseAbs().maxCoeff());
        r.passed = worst <= 1e-12;
        r.detail = fmt("max |c_rollout - c_fem| = %.3e over %.0f snapshots (bound 1e-12)", worst,
                       static_cast<double>(out.c.size()));
    });
}

CriterionResult check_architecture_trend(const fs::path& dir)
{
    return timed(9, "architecture trend (desk scale)", 0.0, [&](CriterionResult& r) {
        const Json sweep = read_json(dir / "sweep" / "sweep.json");
        std::vector<SweepEntry> entries;
        for (const auto& e : sweep.at("entries")) {
            SweepEntry s;
            s.config = OperatorConfig::from_json(e.at("config"));
            s.final_loss = e.at("final_loss").is_number() ? e.at("final_loss").get<double>() : std::nan("");
            s.status = e.at("status").get<std::string>();
            entries.push_back(s);
        }
        const TrendSummary trend = compare_architectures(entries);
        const Json metrics = read_json(dir / "eval" / "metrics.json");
        const double rel = metrics.at("mean_relative_rollout_error").get<double>();
        const Json timing = read_json(dir / "timing.json");
        const double fem = timing.at("fem_seconds_per_simulation").get<double>();
        const double roll = timing.at("rollout_seconds_per_simulation").get<double>();
        const double speedup = fem / roll;

        const bool trend_ok = trend.pairs > 0 && trend.fraction() >= 0.7;
        const bool error_ok = rel <= 0.10;
        const bool speed_ok = speedup >= 10.0;
        r.passed = trend_ok && error_ok && speed_ok;
        r.detail = fmt("STONet <= En-DeepONet in %.0f of %.0f pairs (%.0f%%, need 70%%); ", trend.stonet_wins,
                       trend.pairs, 100.0 * trend.fraction()) +
                   fmt("(a) mean relative rollout error %.4f (need <= 0.10); ", rel) +
                   fmt("(b) rollout %.4f s vs FEM %.4f s, speed-up %.2fx (need >= 10x)", roll, fem, speedup);
    });
}

CriterionResult check_error_flatness(const fs::path& dir)
{
    return timed(10, "relative-error flatness", 0.0, [&](CriterionResult& r) {
        const Json metrics = read_json(dir / "eval" / "metrics.json");
        double at8 = std::nan(""), at36 = std::nan("");
        for (const auto& s : metrics.at("c_by_time")) {
            const double t = s.at("time_h").get<double>();
            if (std::abs(t - 8.0) < 1e-9)
                at8 = s.at("mean_rel").get<double>();
            if (std::abs(t - 36.0) < 1e-9)
                at36 = s.at("mean_rel").get<double>();
        }
        r.passed = std::isfinite(at8) && std::isfinite(at36) && at36 <= 3.0 * at8;
        r.detail = fmt("mean relative error %.4f at 36 h vs %.4f at 8 h, ratio %.2f (need <= 3)", at36, at8,
                       at36 / at8);
    });
}

CriterionResult check_determinism(const fs::path& a, const fs::path& b)
{
    return timed(11, "determinism (two repro runs)", 0.0, [&](CriterionResult& r) {
        const auto files_a = deterministic_artifacts(a);
        const auto files_b = deterministic_artifacts(b);
        if (files_a != files_b) {
            r.passed = false;
            r.detail = "artifact sets differ (" + std::to_string(files_a.size()) + " vs " +
                       std::to_string(files_b.size()) + " files)";
            return;
        }
        std::vector<std::string> differing;
        for (const auto& f : files_a)
            if (file_digest(a / f) != file_digest(b / f))
                differing.push_back(f.string());
        r.passed = !files_a.empty() && differing.empty();
        r.detail = std::to_string(files_a.size()) + " artifacts compared (datasets, loss histories, metrics)";
        if (!differing.empty())
            r.detail += "; differing: " + differing.front() + (differing.size() > 1 ? " and others" : "");
    });
}

} // namespace stonet::verify
