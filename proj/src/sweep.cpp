#include "stonet/sweep.hpp"

#include "stonet/error.hpp"
#include "stonet/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>

namespace stonet {

void SweepSpec::validate() const
{
    if (archs.empty() || widths.empty() || depths.empty() || roots.empty() || blocks.empty())
        throw ConfigError("sweep: every grid axis needs at least one value");
    if (final_window < 1)
        throw ConfigError("sweep: final window must be at least 1");
    train.validate();
}

Json SweepSpec::to_json() const
{
    Json a = Json::array();
    for (auto arch : archs)
        a.push_back(architecture_name(arch));
    return {{"archs", a},       {"widths", widths}, {"depths", depths},
            {"roots", roots},   {"blocks", blocks}, {"train", train.to_json()},
            {"final_window", final_window}};
}

SweepSpec SweepSpec::from_json(const Json& j)
{
    reject_unknown_keys(j, {"archs", "widths", "depths", "roots", "blocks", "train", "final_window", "jobs"}, "sweep");
    SweepSpec s;
    if (j.contains("archs")) {
        s.archs.clear();
        for (const auto& a : j.at("archs"))
            s.archs.push_back(parse_architecture(a.get<std::string>()));
    }
    if (j.contains("widths"))
        s.widths = j.at("widths").get<std::vector<int>>();
    if (j.contains("depths"))
        s.depths = j.at("depths").get<std::vector<int>>();
    if (j.contains("roots"))
        s.roots = j.at("roots").get<std::vector<int>>();
    if (j.contains("blocks"))
        s.blocks = j.at("blocks").get<std::vector<int>>();
    if (j.contains("train"))
        s.train = TrainConfig::from_json(j.at("train"));
    s.final_window = j.value("final_window", s.final_window);
    s.jobs = j.value("jobs", s.jobs);
    s.validate();
    return s;
}

std::string config_hash(const OperatorConfig& config)
{
    const std::string text = config.to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<OperatorConfig> enumerate_sweep(const SweepSpec& spec, int branch_inputs)
{
    std::vector<OperatorConfig> out;
    for (auto arch : spec.archs)
        for (int w : spec.widths)
            for (int d : spec.depths)
                for (int r : (arch == Architecture::DeepONet ? std::vector<int>{1} : spec.roots))
                    for (int l : (arch == Architecture::STONet ? spec.blocks : std::vector<int>{0})) {
                        OperatorConfig c = spec.train.model;
                        c.arch = arch;
                        c.width = w;
                        c.branch_depth = d;
                        c.trunk_depth = d;
                        c.root_depth = r;
                        c.blocks = l;
                        c.branch_inputs = branch_inputs;
                        out.push_back(c);
                    }
    return out;
}

std::vector<SweepEntry> run_sweep(const SweepSpec& spec, const Dataset& dataset)
{
    spec.validate();
    const auto configs = enumerate_sweep(spec, dataset.manifest.branch_dim);
    std::vector<SweepEntry> entries(configs.size());
    parallel_for(configs.size(), spec.jobs, [&](std::size_t i) {
        SweepEntry& e = entries[i];
        e.config = configs[i];
        e.hash = config_hash(e.config);
        e.params = parameter_count(e.config);
        try {
            TrainConfig tc = spec.train;
            tc.model = e.config;
            tc.checkpoint_every = 0;
            OperatorModel model(tc.model);
            const TrainResult r = train(model, dataset, tc);
            e.loss_history = r.loss_history;
            e.final_loss = r.final_window_loss(spec.final_window);
            e.seconds = r.seconds;
        } catch (const std::exception& ex) {
            e.status = std::string("failed: ") + ex.what();
            e.final_loss = std::nan("");
        }
    });
    std::sort(entries.begin(), entries.end(), [](const SweepEntry& a, const SweepEntry& b) {
        return std::tie(a.params, a.hash) < std::tie(b.params, b.hash);
    });
    return entries;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepEntry>& entries, int final_window)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << "config_hash,arch,width,depth,root_depth,blocks,params,final_window_loss_last_" << final_window
        << ",status\n";
    char buf[64];
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof buf, "%.17g", e.final_loss);
        std::string status = e.status;
        std::replace(status.begin(), status.end(), ',', ';');
        out << e.hash << ',' << architecture_name(e.config.arch) << ',' << e.config.width << ','
            << e.config.branch_depth << ',' << e.config.root_depth << ',' << e.config.blocks << ',' << e.params << ','
            << buf << ',' << status << '\n';
    }
}

TrendSummary compare_architectures(const std::vector<SweepEntry>& entries)
{
    std::map<std::tuple<int, int, int>, double> baseline;
    for (const auto& e : entries)
        if (e.config.arch == Architecture::EnDeepONet && e.status == "ok")
            baseline[{e.config.width, e.config.branch_depth, e.config.root_depth}] = e.final_loss;
    TrendSummary s;
    for (const auto& e : entries) {
        if (e.config.arch != Architecture::STONet)
            continue;
        const auto it = baseline.find({e.config.width, e.config.branch_depth, e.config.root_depth});
        if (it == baseline.end())
            continue;
        ++s.pairs;
        if (e.status == "ok" && e.final_loss <= it->second)
            ++s.stonet_wins;
    }
    return s;
}

} // namespace stonet
