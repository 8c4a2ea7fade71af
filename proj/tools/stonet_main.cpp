/**
 * @file stonet_main.cpp
 * @brief Command-line entry point: sample, simulate, dataset build, train,
 *        sweep, eval, rollout and repro.
 *
 * Exit status: 0 success, 1 acceptance checks failed, 2 usage error,
 * 3 a pipeline stage failed.
 */
#include "stonet/checkpoint.hpp"
#include "stonet/dataset.hpp"
#include "stonet/error.hpp"
#include "stonet/evaluate.hpp"
#include "stonet/parallel.hpp"
#include "stonet/pipeline.hpp"
#include "stonet/rollout.hpp"
#include "stonet/snapshot_store.hpp"
#include "stonet/sweep.hpp"
#include "stonet/train.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <regex>

namespace fs = std::filesystem;
using namespace stonet;

namespace {

/// "36h", "129600s", "129600" (seconds).
double parse_duration(const std::string& text)
{
    static const std::regex re(R"(^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([hs]?)\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, re))
        throw ConfigError("cannot parse duration '" + text + "'");
    const double v = std::stod(m[1].str());
    return m[2].str() == "h" ? v * 3600.0 : v;
}

std::vector<fs::path> scenario_dirs(const fs::path& root)
{
    std::vector<fs::path> out;
    if (!fs::is_directory(root))
        throw Error("not a directory: " + root.string());
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "meta.json") && fs::exists(e.path() / "kfield.bin"))
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    if (out.empty())
        throw Error("no scenario directories under " + root.string());
    return out;
}

struct Stage {
    std::string name;
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Density-driven transport simulator and neural operator laboratory"};
    app.require_subcommand(1);
    int jobs = 1;
    app.add_option("--jobs", jobs, "Worker threads (default: logical cores)")->default_val(default_jobs());

    // sample
    auto* sample = app.add_subcommand("sample", "Draw scenario parameters and print their manifests");
    std::uint64_t sample_seed = 1, sample_first = 0;
    int sample_count = 1;
    std::string sample_grid = "70x50", sample_out;
    sample->add_option("--base-seed", sample_seed, "Base seed");
    sample->add_option("--scenarios", sample_count, "Number of scenarios")->check(CLI::PositiveNumber);
    sample->add_option("--first", sample_first, "First scenario index");
    sample->add_option("--grid", sample_grid, "Grid as NXxNY");
    sample->add_option("--out", sample_out, "Write JSON here instead of stdout");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Generate and simulate scenarios");
    std::uint64_t sim_seed = 1, sim_first = 0;
    int sim_count = 1;
    std::string sim_dir = "sims", sim_grid = "70x50", sim_t_end = "36h", sim_record = "4h", sim_stab = "upwind",
                sim_config;
    double sim_dt = 1200.0;
    simulate->add_option("--scenario-dir", sim_dir, "Output directory");
    simulate->add_option("--scenarios", sim_count, "Number of scenarios")->check(CLI::PositiveNumber);
    simulate->add_option("--base-seed", sim_seed, "Base seed");
    simulate->add_option("--first", sim_first, "First scenario index");
    simulate->add_option("--grid", sim_grid, "Grid as NXxNY");
    simulate->add_option("--dt", sim_dt, "Time step (s)");
    simulate->add_option("--t-end", sim_t_end, "End time, e.g. 36h");
    simulate->add_option("--record", sim_record, "Snapshot interval, e.g. 4h");
    simulate->add_option("--stabilization", sim_stab, "upwind, supg or none")
        ->check(CLI::IsMember({"upwind", "supg", "none"}));
    simulate->add_option("--config", sim_config, "Solver configuration JSON (overrides flags)");

    // dataset build
    auto* dataset = app.add_subcommand("dataset", "Dataset operations");
    auto* build = dataset->add_subcommand("build", "Build training records from simulations");
    dataset->require_subcommand(1);
    std::string ds_sims, ds_out = "dataset";
    DatasetConfig ds_cfg;
    std::vector<std::uint64_t> ds_test_ids;
    bool ds_redraw = false;
    build->add_option("--sims-dir", ds_sims, "Directory of scenario directories")->required();
    build->add_option("--out", ds_out, "Output directory");
    build->add_option("--n-dense", ds_cfg.n_dense, "Concentration-weighted points per snapshot");
    build->add_option("--n-uniform", ds_cfg.n_uniform, "Uniform points per snapshot");
    build->add_option("--seed", ds_cfg.seed, "Sampling seed");
    build->add_flag("--with-velocity", ds_cfg.with_velocity, "Append nodal velocity to the branch features");
    build->add_flag("--redraw-per-epoch", ds_redraw, "Not implemented; rejected");
    build->add_option("--test-ids", ds_test_ids, "Scenario ids held out from training");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train an operator model");
    std::string tr_config, tr_data, tr_out = "model", tr_arch;
    int tr_epochs = 0;
    train_cmd->add_option("--config", tr_config, "Training configuration JSON");
    train_cmd->add_option("--dataset", tr_data, "Dataset directory")->required();
    train_cmd->add_option("--out", tr_out, "Checkpoint directory");
    train_cmd->add_option("--epochs", tr_epochs, "Override epochs");
    train_cmd->add_option("--arch", tr_arch, "Override architecture")
        ->check(CLI::IsMember({"deeponet", "endeeponet", "stonet"}));

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Hyper-parameter sweep");
    std::string sw_config, sw_data, sw_out = "sweep";
    sweep_cmd->add_option("--config", sw_config, "Sweep specification JSON");
    sweep_cmd->add_option("--dataset", sw_data, "Dataset directory")->required();
    sweep_cmd->add_option("--out", sw_out, "Output directory");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Roll out a model on held-out simulations");
    std::string ev_model, ev_sims, ev_out = "eval";
    std::vector<std::uint64_t> ev_ids;
    eval_cmd->add_option("--model", ev_model, "Checkpoint directory")->required();
    eval_cmd->add_option("--sims-dir", ev_sims, "Directory of scenario directories")->required();
    eval_cmd->add_option("--ids", ev_ids, "Scenario ids to evaluate (default: all)");
    eval_cmd->add_option("--out", ev_out, "Output directory");

    // rollout
    auto* roll_cmd = app.add_subcommand("rollout", "Write predicted snapshots for one scenario");
    std::string ro_model, ro_scenario, ro_out = "rollout";
    roll_cmd->add_option("--model", ro_model, "Checkpoint directory")->required();
    roll_cmd->add_option("--scenario-dir", ro_scenario, "Simulated scenario directory")->required();
    roll_cmd->add_option("--out", ro_out, "Output directory");

    // repro
    auto* repro = app.add_subcommand("repro", "Run the full pipeline and the acceptance checks");
    bool rp_desk = false, rp_no_sweep = false, rp_no_checks = false;
    std::uint64_t rp_seed = 1;
    std::string rp_out = "repro_desk", rp_config, rp_reference;
    repro->add_flag("--desk", rp_desk, "Desk-scale defaults")->required();
    repro->add_option("--base-seed", rp_seed, "Base seed for every random stream");
    repro->add_option("--out", rp_out, "Run directory");
    repro->add_option("--config", rp_config, "Pipeline configuration JSON (overrides desk defaults)");
    repro->add_option("--reference", rp_reference, "Earlier run directory for the determinism check");
    repro->add_flag("--no-sweep", rp_no_sweep, "Skip the sweep");
    repro->add_flag("--no-checks", rp_no_checks, "Skip the numerical acceptance checks 1-8");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Stage stage{"setup"};
    try {
        if (*sample) {
            stage.name = "sample";
            const Grid grid = Grid::parse(sample_grid);
            const REVSpec rev;
            Json list = Json::array();
            for (int i = 0; i < sample_count; ++i) {
                const ScenarioParams p = sample_scenario(sample_seed, sample_first + static_cast<std::uint64_t>(i));
                Json j = to_json(p);
                j["rev_window_m"] = {rev.window_x, rev.window_y};
                j["grid"] = grid.spec();
                list.push_back(j);
            }
            if (sample_out.empty())
                std::cout << list.dump(2) << '\n';
            else
                write_json(sample_out, list);
            return 0;
        }
        if (*simulate) {
            stage.name = "simulate";
            SolverConfig cfg;
            if (!sim_config.empty()) {
                cfg = solver_config_from_json(read_json(sim_config));
            } else {
                cfg.dt = sim_dt;
                cfg.t_end = parse_duration(sim_t_end);
                cfg.record_interval = parse_duration(sim_record);
                cfg.stabilization = sim_stab == "supg" ? Stabilization::Supg
                                    : sim_stab == "none" ? Stabilization::None
                                                         : Stabilization::Upwind;
            }
            const Grid grid = Grid::parse(sim_grid);
            BatchTiming timing;
            const Json extra = {{"command", "simulate"}, {"grid_spec", grid.spec()}};
            const auto dirs = simulate_batch(sim_dir, sim_seed, sim_first, static_cast<std::uint64_t>(sim_count), grid,
                                             cfg, jobs, &timing, extra);
            write_artifact_meta(sim_dir, "simulate",
                                {{"base_seed", sim_seed}, {"first", sim_first}, {"scenarios", sim_count},
                                 {"grid", grid.spec()}, {"solver", to_json(cfg)}});
            std::cout << "simulated " << dirs.size() << " scenarios, mean " << timing.mean() << " s each\n";
            return 0;
        }
        if (*build) {
            stage.name = "dataset build";
            ds_cfg.redraw_per_epoch = ds_redraw;
            std::vector<fs::path> train_dirs;
            for (const auto& d : scenario_dirs(ds_sims)) {
                const auto id = read_json(d / "meta.json").at("scenario").at("index").get<std::uint64_t>();
                if (std::find(ds_test_ids.begin(), ds_test_ids.end(), id) == ds_test_ids.end())
                    train_dirs.push_back(d);
            }
            const Dataset ds = build_dataset(train_dirs, ds_test_ids, ds_cfg, jobs);
            write_dataset(ds, ds_out);
            write_artifact_meta(ds_out, "dataset build", ds.manifest.to_json());
            std::cout << "records: " << ds.size() << " from " << train_dirs.size() << " scenarios\n";
            return 0;
        }
        if (*train_cmd) {
            stage.name = "train";
            TrainConfig cfg = tr_config.empty() ? TrainConfig{} : TrainConfig::from_json(read_json(tr_config));
            if (tr_epochs > 0)
                cfg.epochs = tr_epochs;
            if (!tr_arch.empty())
                cfg.model.arch = parse_architecture(tr_arch);
            const Dataset ds = read_dataset(tr_data);
            cfg.model.branch_inputs = ds.manifest.branch_dim;
            if (cfg.checkpoint_every > 0)
                cfg.checkpoint_dir = tr_out;
            OperatorModel model(cfg.model);
            const TrainResult r = train(model, ds, cfg, [&](int epoch, double loss) {
                if (epoch % std::max(1, cfg.epochs / 20) == 0 || epoch + 1 == cfg.epochs)
                    std::cout << "epoch " << epoch << " loss " << loss << '\n';
            });
            save_checkpoint(tr_out, model, {{"optimizer", "adam"}, {"train", cfg.to_json()}});
            write_loss_history(fs::path(tr_out) / "loss.csv", r.loss_history);
            write_artifact_meta(tr_out, "train", cfg.to_json());
            std::cout << "parameters " << model.parameter_count() << ", final-20 loss " << r.final_window_loss(20)
                      << '\n';
            return 0;
        }
        if (*sweep_cmd) {
            stage.name = "sweep";
            SweepSpec spec = sw_config.empty() ? SweepSpec{} : SweepSpec::from_json(read_json(sw_config));
            spec.jobs = jobs;
            const Dataset ds = read_dataset(sw_data);
            const auto entries = run_sweep(spec, ds);
            fs::create_directories(fs::path(sw_out) / "losses");
            write_sweep_csv(fs::path(sw_out) / "sweep.csv", entries, spec.final_window);
            for (const auto& e : entries)
                write_loss_history(fs::path(sw_out) / "losses" / (e.hash + ".csv"), e.loss_history);
            write_artifact_meta(sw_out, "sweep", spec.to_json());
            const TrendSummary t = compare_architectures(entries);
            std::cout << entries.size() << " runs; STONet <= En-DeepONet in " << t.stonet_wins << "/" << t.pairs
                      << " matched pairs\n";
            return 0;
        }
        if (*eval_cmd) {
            stage.name = "eval";
            const OperatorModel model = load_checkpoint(ev_model);
            const bool with_velocity = model.config().branch_inputs == branch_dim(true);
            std::vector<StoredSimulation> sims;
            for (const auto& d : scenario_dirs(ev_sims)) {
                StoredSimulation s = read_simulation(d, with_velocity);
                if (ev_ids.empty() || std::find(ev_ids.begin(), ev_ids.end(), s.params.index) != ev_ids.end())
                    sims.push_back(std::move(s));
            }
            EvalConfig ec;
            ec.with_velocity = with_velocity;
            const Metrics m = evaluate(model, sims, ec);
            write_metrics(ev_out, m);
            write_artifact_meta(ev_out, "eval", {{"model", ev_model}, {"sims_dir", ev_sims}, {"ids", ev_ids}});
            std::cout << "mean relative rollout error " << m.mean_rel_rollout << " over " << sims.size()
                      << " scenarios\n";
            return 0;
        }
        if (*roll_cmd) {
            stage.name = "rollout";
            const OperatorModel model = load_checkpoint(ro_model);
            const bool with_velocity = model.config().branch_inputs == branch_dim(true);
            const StoredSimulation sim = read_simulation(ro_scenario, with_velocity);
            const RolloutResult r = rollout(model, sim.series.c.front(), node_branch_features(sim, with_velocity),
                                            sim.grid, sim.series.times_h);
            fs::create_directories(ro_out);
            Json files = Json::array();
            for (std::size_t k = 0; k < r.c.size(); ++k) {
                write_f64(fs::path(ro_out) / snapshot_file_name("c", r.times_h[k]), r.c[k]);
                files.push_back({{"time_h", r.times_h[k]}, {"c", snapshot_file_name("c", r.times_h[k])}});
            }
            write_json(fs::path(ro_out) / "meta.json",
                       {{"tool_version", kToolVersion},
                        {"command", "rollout"},
                        {"model", ro_model},
                        {"source", ro_scenario},
                        {"scenario", to_json(sim.params)},
                        {"grid", to_json(sim.grid)},
                        {"times_h", r.times_h},
                        {"snapshots", files},
                        {"shapes", {{"c", {sim.grid.node_count()}}}},
                        {"c_min", r.c_min},
                        {"c_max", r.c_max},
                        {"out_of_range_values", r.out_of_range}});
            std::cout << "rollout written; c in [" << r.c_min << ", " << r.c_max << "], " << r.out_of_range
                      << " nodal values outside [0, 1]\n";
            return 0;
        }
        if (*repro) {
            stage.name = "repro";
            ReproConfig cfg = rp_config.empty() ? ReproConfig::desk(rp_seed) : ReproConfig::from_json(read_json(rp_config));
            if (rp_config.empty())
                cfg.base_seed = rp_seed;
            cfg.jobs = jobs;
            cfg.run_sweep = cfg.run_sweep && !rp_no_sweep;
            cfg.run_checks = cfg.run_checks && !rp_no_checks;
            cfg.reference = rp_reference;
            const ReproSummary s = run_repro(rp_out, cfg, &std::cout);
            std::cout << (s.all_passed() ? "ALL PASS" : "NOT ALL PASS") << '\n';
            return s.all_passed() ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << stage.name << ": configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "stage '" << stage.name << "' failed: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
