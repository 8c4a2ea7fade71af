#include "stonet/pipeline.hpp"

#include "stonet/checkpoint.hpp"
#include "stonet/error.hpp"
#include "stonet/evaluate.hpp"
#include "stonet/parallel.hpp"
#include "stonet/rng.hpp"
#include "stonet/rollout.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

namespace stonet {

namespace fs = std::filesystem;

std::uint64_t stage_seed(std::uint64_t base_seed, const std::string& stage)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : stage) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return hash_key({base_seed, h});
}

double BatchTiming::mean() const
{
    return seconds.empty() ? 0.0 : std::accumulate(seconds.begin(), seconds.end(), 0.0) / static_cast<double>(seconds.size());
}

std::vector<fs::path> simulate_batch(const fs::path& dir, std::uint64_t base_seed, std::uint64_t first,
                                     std::uint64_t count, const Grid& grid, const SolverConfig& solver, int jobs,
                                     BatchTiming* timing, const Json& extra_meta)
{
    solver.validate();
    std::vector<fs::path> dirs(count);
    std::vector<double> seconds(count, 0.0);
    parallel_for(count, jobs, [&](std::size_t i) {
        const std::uint64_t index = first + i;
        const Scenario sc = generate_scenario(base_seed, index, grid);
        const auto start = std::chrono::steady_clock::now();
        const TimeSeries ts = run_simulation(sc, grid, solver);
        seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        dirs[i] = dir / scenario_dir_name(index);
        write_simulation(dirs[i], sc, grid, solver, ts, extra_meta);
    });
    if (timing)
        timing->seconds = seconds;
    return dirs;
}

ReproConfig ReproConfig::desk(std::uint64_t base_seed)
{
    ReproConfig c;
    c.base_seed = base_seed;
    c.grid = "35x25";
    c.train_scenarios = 40;
    c.test_scenarios = 5;
    c.dataset.n_dense = 400;
    c.dataset.n_uniform = 200;
    c.dataset.seed = stage_seed(base_seed, "dataset");

    c.sweep.archs = {Architecture::STONet, Architecture::EnDeepONet};
    c.sweep.widths = {50};
    c.sweep.depths = {4, 8, 12};
    c.sweep.roots = {4, 8, 12};
    c.sweep.blocks = {4, 8};
    c.sweep.final_window = 20;
    c.sweep.train.epochs = 500;
    c.sweep.train.batch_size = 256;
    c.sweep.train.batches_per_epoch = 4;
    c.sweep.train.lr = 3e-4;
    c.sweep.train.seed = stage_seed(base_seed, "sweep");
    c.sweep.train.model.seed = stage_seed(base_seed, "sweep-init");

    c.final_train.epochs = 2000;
    c.final_train.batch_size = 256;
    c.final_train.batches_per_epoch = 20;
    c.final_train.lr = 2e-3;
    c.final_train.lr_decay_every = 500;
    c.final_train.lr_decay = 0.5;
    c.final_train.seed = stage_seed(base_seed, "train");
    c.final_train.model.arch = Architecture::STONet;
    c.final_train.model.width = 50;
    c.final_train.model.branch_depth = 4;
    c.final_train.model.trunk_depth = 4;
    c.final_train.model.root_depth = 4;
    c.final_train.model.blocks = 4;
    c.final_train.model.seed = stage_seed(base_seed, "train-init");
    return c;
}

Json ReproConfig::to_json() const
{
    return {{"base_seed", base_seed},
            {"grid", grid},
            {"train_scenarios", train_scenarios},
            {"test_scenarios", test_scenarios},
            {"solver", stonet::to_json(solver)},
            {"dataset",
             {{"n_dense", dataset.n_dense},
              {"n_uniform", dataset.n_uniform},
              {"seed", dataset.seed},
              {"with_velocity", dataset.with_velocity},
              {"weight_floor", dataset.weight_floor}}},
            {"sweep", sweep.to_json()},
            {"final_train", final_train.to_json()},
            {"run_sweep", run_sweep},
            {"run_checks", run_checks}};
}

ReproConfig ReproConfig::from_json(const Json& j)
{
    reject_unknown_keys(j, {"base_seed", "grid", "train_scenarios", "test_scenarios", "solver", "dataset", "sweep",
                            "final_train", "run_sweep", "run_checks", "jobs"},
                        "repro");
    ReproConfig c = desk(j.value("base_seed", std::uint64_t{1}));
    c.grid = j.value("grid", c.grid);
    c.train_scenarios = j.value("train_scenarios", c.train_scenarios);
    c.test_scenarios = j.value("test_scenarios", c.test_scenarios);
    if (j.contains("solver"))
        c.solver = solver_config_from_json(j.at("solver"));
    if (j.contains("dataset")) {
        const Json& d = j.at("dataset");
        reject_unknown_keys(d, {"n_dense", "n_uniform", "seed", "with_velocity", "weight_floor"}, "repro.dataset");
        c.dataset.n_dense = d.value("n_dense", c.dataset.n_dense);
        c.dataset.n_uniform = d.value("n_uniform", c.dataset.n_uniform);
        c.dataset.seed = d.value("seed", c.dataset.seed);
        c.dataset.with_velocity = d.value("with_velocity", c.dataset.with_velocity);
        c.dataset.weight_floor = d.value("weight_floor", c.dataset.weight_floor);
    }
    if (j.contains("sweep"))
        c.sweep = SweepSpec::from_json(j.at("sweep"));
    if (j.contains("final_train"))
        c.final_train = TrainConfig::from_json(j.at("final_train"));
    c.run_sweep = j.value("run_sweep", c.run_sweep);
    c.run_checks = j.value("run_checks", c.run_checks);
    c.jobs = j.value("jobs", c.jobs);
    if (c.train_scenarios < 1 || c.test_scenarios < 1)
        throw ConfigError("repro: scenario counts must be positive");
    return c;
}

bool ReproSummary::all_passed() const
{
    return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.evaluated && c.passed; });
}

std::string file_digest(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

std::vector<fs::path> deterministic_artifacts(const fs::path& run_dir)
{
    std::vector<fs::path> out;
    for (const char* sub : {"dataset", "sweep", "model", "eval", "sims"}) {
        const fs::path d = run_dir / sub;
        if (!fs::exists(d))
            continue;
        for (const auto& entry : fs::recursive_directory_iterator(d))
            if (entry.is_regular_file())
                out.push_back(fs::relative(entry.path(), run_dir));
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

void log_line(std::ostream* log, const std::string& s)
{
    if (log)
        *log << s << std::endl;
}

std::string seconds_str(double s)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f s", s);
    return buf;
}

double since(std::chrono::steady_clock::time_point t)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

void write_plot_script(const fs::path& dir)
{
    std::ofstream gp(dir / "plot_errors.gp");
    gp << "# gnuplot -persist plot_errors.gp\n"
          "set datafile separator ','\n"
          "set key autotitle columnhead\n"
          "set multiplot layout 2,1\n"
          "set ylabel 'mean absolute error'\n"
          "plot 'metrics.csv' every ::1 using 1:2 with linespoints title 'c', '' every ::2 using 1:5 with linespoints title 'dc/dt'\n"
          "set ylabel 'mean relative error'\n"
          "set xlabel 'time (h)'\n"
          "plot 'metrics.csv' every ::1 using 1:3 with linespoints title 'c', '' every ::2 using 1:6 with linespoints title 'dc/dt'\n"
          "unset multiplot\n";
}

Json sweep_json(const std::vector<SweepEntry>& entries, int window)
{
    Json a = Json::array();
    for (const auto& e : entries) {
        Json j = {{"hash", e.hash}, {"config", e.config.to_json()}, {"params", e.params}, {"status", e.status}};
        j["final_loss"] = std::isfinite(e.final_loss) ? Json(e.final_loss) : Json(nullptr);
        a.push_back(j);
    }
    return {{"final_window", window}, {"entries", a}};
}

} // namespace

ReproSummary run_repro(const fs::path& out, const ReproConfig& config, std::ostream* log)
{
    const auto t_all = std::chrono::steady_clock::now();
    fs::create_directories(out);
    const Grid grid = Grid::parse(config.grid);
    Json meta = {{"tool_version", kToolVersion}, {"command", "repro"}, {"config", config.to_json()}};
    write_json(out / "meta.json", meta);
    ReproSummary summary;

    if (config.run_checks) {
        using namespace verify;
        for (auto check : {check_permeability_oracle, check_hydrostatic_no_flow, check_pressure_convergence,
                           check_diffusion_oracle, check_solute_balance, check_bookkeeping, check_gradients,
                           check_rollout_identity}) {
            summary.criteria.push_back(check());
            log_line(log, summary.criteria.back().line());
        }
    }

    // Simulations: train ids [0, n_train), test ids [n_train, n_train + n_test).
    auto t = std::chrono::steady_clock::now();
    const auto n_train = static_cast<std::uint64_t>(config.train_scenarios);
    const auto n_test = static_cast<std::uint64_t>(config.test_scenarios);
    BatchTiming timing;
    const auto dirs = simulate_batch(out / "sims", config.base_seed, 0, n_train + n_test, grid, config.solver,
                                     config.jobs, &timing);
    write_artifact_meta(out / "sims", "repro simulate", config.to_json());
    const std::vector<fs::path> train_dirs(dirs.begin(), dirs.begin() + static_cast<long>(n_train));
    const std::vector<fs::path> test_dirs(dirs.begin() + static_cast<long>(n_train), dirs.end());
    log_line(log, "simulated " + std::to_string(dirs.size()) + " scenarios on " + grid.spec() + " in " +
                      seconds_str(since(t)));

    t = std::chrono::steady_clock::now();
    std::vector<std::uint64_t> test_ids;
    for (std::uint64_t i = n_train; i < n_train + n_test; ++i)
        test_ids.push_back(i);
    const Dataset dataset = build_dataset(train_dirs, test_ids, config.dataset, config.jobs);
    write_dataset(dataset, out / "dataset");
    write_artifact_meta(out / "dataset", "repro dataset", config.to_json());
    log_line(log, "dataset: " + std::to_string(dataset.size()) + " records in " + seconds_str(since(t)));

    if (config.run_sweep) {
        t = std::chrono::steady_clock::now();
        SweepSpec spec = config.sweep;
        spec.jobs = config.jobs;
        const auto entries = run_sweep(spec, dataset);
        fs::create_directories(out / "sweep" / "losses");
        write_artifact_meta(out / "sweep", "repro sweep", config.to_json());
        write_sweep_csv(out / "sweep" / "sweep.csv", entries, spec.final_window);
        write_json(out / "sweep" / "sweep.json", sweep_json(entries, spec.final_window));
        for (const auto& e : entries)
            write_loss_history(out / "sweep" / "losses" / (e.hash + ".csv"), e.loss_history);
        const TrendSummary trend = compare_architectures(entries);
        log_line(log, "sweep: " + std::to_string(entries.size()) + " runs, STONet better in " +
                          std::to_string(trend.stonet_wins) + "/" + std::to_string(trend.pairs) + " pairs, " +
                          seconds_str(since(t)));
    }

    t = std::chrono::steady_clock::now();
    TrainConfig tc = config.final_train;
    tc.model.branch_inputs = dataset.manifest.branch_dim;
    OperatorModel model(tc.model);
    const TrainResult trained = train(model, dataset, tc);
    save_checkpoint(out / "model", model,
                    {{"optimizer", "adam"}, {"lr", tc.lr}, {"epochs", tc.epochs}, {"train", tc.to_json()}});
    write_loss_history(out / "model" / "loss.csv", trained.loss_history);
    write_artifact_meta(out / "model", "repro train", config.to_json());
    log_line(log, "final model: " + std::to_string(model.parameter_count()) + " parameters, final-20 loss " +
                      std::to_string(trained.final_window_loss(20)) + ", " + seconds_str(since(t)));

    t = std::chrono::steady_clock::now();
    std::vector<StoredSimulation> test;
    for (const auto& d : test_dirs)
        test.push_back(read_simulation(d, config.dataset.with_velocity));
    EvalConfig ec;
    ec.with_velocity = config.dataset.with_velocity;
    const Metrics metrics = evaluate(model, test, ec);
    write_metrics(out / "eval", metrics);
    write_plot_script(out / "eval");
    write_artifact_meta(out / "eval", "repro eval", config.to_json());

    // Rollout wall clock on the same machine, per simulation.
    double rollout_seconds = 0.0;
    for (const auto& sim : test) {
        const BranchProvider branch = node_branch_features(sim, ec.with_velocity);
        const auto start = std::chrono::steady_clock::now();
        const RolloutResult r = rollout(model, sim.series.c.front(), branch, sim.grid, sim.series.times_h);
        rollout_seconds += since(start);
        if (r.c.size() != sim.series.size())
            throw Error("repro: rollout length mismatch");
    }
    rollout_seconds /= static_cast<double>(test.size());
    write_json(out / "timing.json", {{"fem_seconds_per_simulation", timing.mean()},
                                     {"fem_seconds", timing.seconds},
                                     {"rollout_seconds_per_simulation", rollout_seconds},
                                     {"final_training_seconds", trained.seconds},
                                     {"total_seconds", since(t_all)}});
    log_line(log, "evaluation: mean relative rollout error " + std::to_string(metrics.mean_rel_rollout) + ", " +
                      seconds_str(since(t)));

    if (config.run_sweep) {
        summary.criteria.push_back(verify::check_architecture_trend(out));
        log_line(log, summary.criteria.back().line());
    }
    summary.criteria.push_back(verify::check_error_flatness(out));
    log_line(log, summary.criteria.back().line());
    if (!config.reference.empty()) {
        summary.criteria.push_back(verify::check_determinism(config.reference, out));
    } else {
        verify::CriterionResult r;
        r.id = 11;
        r.name = "determinism (two repro runs)";
        r.evaluated = false;
        r.detail = "needs a second run; pass --reference <previous run dir>";
        summary.criteria.push_back(r);
    }
    log_line(log, summary.criteria.back().line());

    Json digest = Json::object();
    for (const auto& f : deterministic_artifacts(out))
        digest[f.generic_string()] = file_digest(out / f);
    write_json(out / "digest.json", digest);

    Json crit = Json::array();
    std::ofstream txt(out / "summary.txt");
    for (const auto& c : summary.criteria) {
        crit.push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"evaluated", c.evaluated},
                        {"detail", c.detail}, {"seconds", c.seconds}});
        txt << c.line() << '\n';
    }
    txt << (summary.all_passed() ? "ALL PASS" : "NOT ALL PASS") << '\n';
    write_json(out / "summary.json", {{"tool_version", kToolVersion}, {"all_passed", summary.all_passed()},
                                      {"criteria", crit}});
    return summary;
}

} // namespace stonet
