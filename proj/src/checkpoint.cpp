#include "stonet/checkpoint.hpp"

#include "stonet/error.hpp"

namespace stonet {

namespace fs = std::filesystem;

void save_checkpoint(const fs::path& dir, const OperatorModel& model, const Json& optimizer_meta)
{
    fs::create_directories(dir);
    Json params = Json::array();
    std::size_t offset = 0;
    for (const Parameter* p : model.parameters()) {
        params.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}, {"offset", offset}});
        offset += static_cast<std::size_t>(p->value.size());
    }
    const Json meta = {
        {"tool_version", kToolVersion},
        {"config", model.config().to_json()},
        {"stats", model.stats().to_json()},
        {"parameter_count", model.parameter_count()},
        {"parameters", params},
        {"weights", {{"file", "weights.bin"}, {"encoding", "little-endian float64, column-major per tensor"}}},
        {"optimizer", optimizer_meta},
    };
    write_f64(dir / "weights.bin", model.flat_parameters());
    write_json(dir / "model.json", meta);
}

OperatorModel load_checkpoint(const fs::path& dir)
{
    const Json meta = read_json(dir / "model.json");
    reject_unknown_keys(meta, {"tool_version", "config", "stats", "parameter_count", "parameters", "weights", "optimizer"},
                        "model.json");
    for (const char* key : {"config", "stats", "parameter_count", "parameters"})
        if (!meta.contains(key))
            throw FormatError(std::string("model.json: missing '") + key + "'");
    OperatorModel model(OperatorConfig::from_json(meta.at("config")), NormalizationStats::from_json(meta.at("stats")));
    const auto count = meta.at("parameter_count").get<long>();
    if (count != model.parameter_count())
        throw FormatError("model.json: parameter_count " + std::to_string(count) + " does not match the architecture (" +
                          std::to_string(model.parameter_count()) + ")");
    const auto& listed = meta.at("parameters");
    const auto actual = model.parameters();
    if (listed.size() != actual.size())
        throw FormatError("model.json: parameter list length does not match the architecture");
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (listed[i].at("rows").get<long>() != actual[i]->value.rows() ||
            listed[i].at("cols").get<long>() != actual[i]->value.cols())
            throw FormatError("model.json: shape mismatch for " + actual[i]->name);
    }
    model.set_flat_parameters(read_f64(dir / "weights.bin", static_cast<std::size_t>(count)));
    return model;
}

} // namespace stonet
