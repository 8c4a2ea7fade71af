#include "stonet/json_io.hpp"

#include "stonet/error.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace stonet {

void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!j.is_object())
        throw ConfigError(where + ": expected a JSON object");
    for (const auto& item : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known)
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

namespace {

template <class T>
void get_if(const Json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

} // namespace

Json to_json(const Grid& grid)
{
    return {{"nx", grid.nx()}, {"ny", grid.ny()}, {"length_x", grid.length_x()},
            {"length_y", grid.length_y()}, {"nodes", grid.node_count()},
            {"elements", grid.element_count()}, {"quadrature_points", grid.quad_count()}};
}

Grid grid_from_json(const Json& j)
{
    reject_unknown_keys(j, {"nx", "ny", "length_x", "length_y", "nodes", "elements", "quadrature_points"}, "grid");
    return Grid(j.at("nx").get<int>(), j.at("ny").get<int>(), j.value("length_x", 0.7),
                j.value("length_y", 0.5));
}

Json to_json(const ScenarioParams& p)
{
    return {{"base_seed", p.base_seed}, {"index", p.index}, {"seed", p.seed},
            {"mu_theta_deg", p.mu_theta}, {"lambda", p.lambda},
            {"p_right_offset_pa", p.p_right_offset}, {"p_left_offset_pa", p.p_left_offset}};
}

ScenarioParams scenario_params_from_json(const Json& j)
{
    reject_unknown_keys(j, {"base_seed", "index", "seed", "mu_theta_deg", "lambda", "p_right_offset_pa",
                            "p_left_offset_pa"},
                        "scenario");
    ScenarioParams p;
    p.base_seed = j.at("base_seed").get<std::uint64_t>();
    p.index = j.at("index").get<std::uint64_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.mu_theta = j.at("mu_theta_deg").get<double>();
    p.lambda = j.at("lambda").get<double>();
    p.p_right_offset = j.at("p_right_offset_pa").get<double>();
    p.p_left_offset = j.at("p_left_offset_pa").get<double>();
    return p;
}

Json to_json(const DeterministicParams& d)
{
    return {{"g", d.g}, {"rho0", d.rho0}, {"rho_s", d.rho_s}, {"mu", d.mu}, {"phi", d.phi},
            {"d_mol", d.d_mol}, {"k_r", d.k_r}, {"alpha_l", d.alpha_l}, {"alpha_t", d.alpha_t},
            {"tau", d.tau}};
}

DeterministicParams deterministic_params_from_json(const Json& j)
{
    reject_unknown_keys(j, {"g", "rho0", "rho_s", "mu", "phi", "d_mol", "k_r", "alpha_l", "alpha_t", "tau"},
                        "deterministic");
    DeterministicParams d;
    get_if(j, "g", d.g);
    get_if(j, "rho0", d.rho0);
    get_if(j, "rho_s", d.rho_s);
    get_if(j, "mu", d.mu);
    get_if(j, "phi", d.phi);
    get_if(j, "d_mol", d.d_mol);
    get_if(j, "k_r", d.k_r);
    get_if(j, "alpha_l", d.alpha_l);
    get_if(j, "alpha_t", d.alpha_t);
    get_if(j, "tau", d.tau);
    d.validate();
    return d;
}

Json to_json(const REVSpec& r)
{
    return {{"window_x_m", r.window_x}, {"window_y_m", r.window_y}, {"volume_m2", r.volume}};
}

REVSpec rev_from_json(const Json& j)
{
    reject_unknown_keys(j, {"window_x_m", "window_y_m", "volume_m2"}, "rev");
    REVSpec r;
    get_if(j, "window_x_m", r.window_x);
    get_if(j, "window_y_m", r.window_y);
    get_if(j, "volume_m2", r.volume);
    return r;
}

namespace {

const char* stabilization_name(Stabilization s)
{
    switch (s) {
    case Stabilization::None: return "none";
    case Stabilization::Upwind: return "upwind";
    case Stabilization::Supg: return "supg";
    }
    return "upwind";
}

Stabilization parse_stabilization(const std::string& s)
{
    if (s == "none")
        return Stabilization::None;
    if (s == "upwind")
        return Stabilization::Upwind;
    if (s == "supg")
        return Stabilization::Supg;
    throw ConfigError("unknown stabilization '" + s + "'");
}

} // namespace

Json to_json(const SolverConfig& c)
{
    return {{"dt_s", c.dt}, {"t_end_s", c.t_end}, {"record_interval_s", c.record_interval},
            {"pressure_tolerance", c.pressure_tolerance}, {"transport_tolerance", c.transport_tolerance},
            {"stabilization", stabilization_name(c.stabilization)}, {"band_top_m", c.band_top},
            {"band_bottom_m", c.band_bottom}, {"coupling_iterations", c.coupling_iterations},
            {"coupling_tolerance", c.coupling_tolerance}, {"direct_threshold", c.direct_threshold}};
}

SolverConfig solver_config_from_json(const Json& j)
{
    reject_unknown_keys(j, {"dt_s", "t_end_s", "record_interval_s", "pressure_tolerance", "transport_tolerance",
                            "stabilization", "band_top_m", "band_bottom_m", "coupling_iterations",
                            "coupling_tolerance", "direct_threshold"},
                        "solver");
    SolverConfig c;
    get_if(j, "dt_s", c.dt);
    get_if(j, "t_end_s", c.t_end);
    get_if(j, "record_interval_s", c.record_interval);
    get_if(j, "pressure_tolerance", c.pressure_tolerance);
    get_if(j, "transport_tolerance", c.transport_tolerance);
    if (j.contains("stabilization"))
        c.stabilization = parse_stabilization(j.at("stabilization").get<std::string>());
    get_if(j, "band_top_m", c.band_top);
    get_if(j, "band_bottom_m", c.band_bottom);
    get_if(j, "coupling_iterations", c.coupling_iterations);
    get_if(j, "coupling_tolerance", c.coupling_tolerance);
    get_if(j, "direct_threshold", c.direct_threshold);
    c.validate();
    return c;
}

Json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_artifact_meta(const std::filesystem::path& dir, const std::string& command, const Json& config)
{
    std::filesystem::create_directories(dir);
    write_json(dir / "meta.json", {{"tool_version", kToolVersion}, {"command", command}, {"config", config}});
}

void write_json(const std::filesystem::path& path, const Json& j)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_f64(const std::filesystem::path& path, const double* data, std::size_t count)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            auto bits = std::bit_cast<std::uint64_t>(data[i]);
            bits = __builtin_bswap64(bits);
            out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
        }
    }
    if (!out)
        throw Error("write failed: " + path.string());
}

void write_f64(const std::filesystem::path& path, const std::vector<double>& data)
{
    write_f64(path, data.data(), data.size());
}

void write_f64(const std::filesystem::path& path, const Eigen::VectorXd& data)
{
    write_f64(path, data.data(), static_cast<std::size_t>(data.size()));
}

std::vector<double> read_f64(const std::filesystem::path& path, std::size_t expected_count)
{
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in)
        throw FormatError("cannot open " + path.string());
    const auto size = static_cast<std::size_t>(in.tellg());
    const std::size_t expected = expected_count * sizeof(double);
    if (size < expected)
        throw FormatError(path.string() + ": truncated at byte offset " + std::to_string(size) +
                          ", expected " + std::to_string(expected) + " bytes");
    if (size > expected)
        throw FormatError(path.string() + ": unexpected data after byte offset " + std::to_string(expected));
    in.seekg(0);
    std::vector<double> out(expected_count);
    in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(expected));
    if constexpr (std::endian::native != std::endian::little) {
        for (auto& v : out)
            v = std::bit_cast<double>(__builtin_bswap64(std::bit_cast<std::uint64_t>(v)));
    }
    return out;
}

} // namespace stonet
