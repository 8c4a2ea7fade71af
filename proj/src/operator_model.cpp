#include "stonet/operator_model.hpp"

#include "stonet/error.hpp"

#include <algorithm>
#include <array>

namespace stonet {

const char* architecture_name(Architecture a)
{
    switch (a) {
    case Architecture::DeepONet: return "deeponet";
    case Architecture::EnDeepONet: return "endeeponet";
    case Architecture::STONet: return "stonet";
    }
    return "stonet";
}

Architecture parse_architecture(const std::string& s)
{
    if (s == "deeponet")
        return Architecture::DeepONet;
    if (s == "endeeponet")
        return Architecture::EnDeepONet;
    if (s == "stonet")
        return Architecture::STONet;
    throw ConfigError("unknown architecture '" + s + "'");
}

const char* fusion_name(Fusion f) { return f == Fusion::Reinject ? "reinject" : "literal-chain"; }

Fusion parse_fusion(const std::string& s)
{
    if (s == "reinject")
        return Fusion::Reinject;
    if (s == "literal-chain")
        return Fusion::LiteralChain;
    throw ConfigError("unknown fusion mode '" + s + "'");
}

void OperatorConfig::validate() const
{
    if (width <= 0)
        throw ConfigError("operator: width must be positive");
    if (branch_depth < 1 || trunk_depth < 1)
        throw ConfigError("operator: branch and trunk depths must be at least 1");
    if (arch != Architecture::DeepONet && root_depth < 1)
        throw ConfigError("operator: root depth must be at least 1");
    if (blocks < 0)
        throw ConfigError("operator: block count must be non-negative");
    if (branch_inputs < 1 || trunk_inputs < 1)
        throw ConfigError("operator: input dimensions must be positive");
}

Json OperatorConfig::to_json() const
{
    return {{"arch", architecture_name(arch)}, {"width", width},
            {"branch_depth", branch_depth},    {"trunk_depth", trunk_depth},
            {"root_depth", root_depth},        {"blocks", blocks},
            {"fusion", fusion_name(fusion)},   {"residual", residual},
            {"branch_minus_state", branch_minus_state},
            {"branch_inputs", branch_inputs},  {"trunk_inputs", trunk_inputs},
            {"seed", seed}};
}

OperatorConfig OperatorConfig::from_json(const Json& j)
{
    reject_unknown_keys(j, {"arch", "width", "branch_depth", "trunk_depth", "root_depth", "blocks", "fusion",
                            "residual", "branch_minus_state", "branch_inputs", "trunk_inputs", "seed"},
                        "operator");
    OperatorConfig c;
    if (j.contains("arch"))
        c.arch = parse_architecture(j.at("arch").get<std::string>());
    c.width = j.value("width", c.width);
    c.branch_depth = j.value("branch_depth", c.branch_depth);
    c.trunk_depth = j.value("trunk_depth", c.trunk_depth);
    c.root_depth = j.value("root_depth", c.root_depth);
    c.blocks = j.value("blocks", c.blocks);
    if (j.contains("fusion"))
        c.fusion = parse_fusion(j.at("fusion").get<std::string>());
    c.residual = j.value("residual", c.residual);
    c.branch_minus_state = j.value("branch_minus_state", c.branch_minus_state);
    c.branch_inputs = j.value("branch_inputs", c.branch_inputs);
    c.trunk_inputs = j.value("trunk_inputs", c.trunk_inputs);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

long parameter_count(const OperatorConfig& c)
{
    const long w = c.width;
    const long hidden = w * w + w;
    const long branch = (c.branch_inputs * w + w) + (c.branch_depth - 1) * hidden;
    const long trunk = (c.trunk_inputs * w + w) + (c.trunk_depth - 1) * hidden;
    const long output = w + 1;
    switch (c.arch) {
    case Architecture::DeepONet:
        return branch + trunk + 1;
    case Architecture::EnDeepONet:
        return branch + trunk + (3 * w * w + w) + (c.root_depth - 1) * hidden + output;
    case Architecture::STONet:
        return branch + trunk + c.blocks * (3 * hidden + 3 * w * w + w) + c.root_depth * hidden + output;
    }
    return 0;
}

namespace {

std::vector<int> repeat(int n, int value) { return std::vector<int>(static_cast<std::size_t>(n), value); }

std::vector<Activation> tanh_layers(int n) { return std::vector<Activation>(static_cast<std::size_t>(n), Activation::Tanh); }

NormalizationStats identity_stats(int nb, int nt)
{
    NormalizationStats s;
    s.branch_mean = Eigen::VectorXd::Zero(nb);
    s.branch_std = Eigen::VectorXd::Ones(nb);
    s.trunk_mean = Eigen::VectorXd::Zero(nt);
    s.trunk_std = Eigen::VectorXd::Ones(nt);
    return s;
}

} // namespace

OperatorModel::OperatorModel(const OperatorConfig& config, NormalizationStats stats) : config_(config)
{
    config_.validate();
    set_stats(stats.branch_mean.size() == 0 ? identity_stats(config_.branch_inputs, config_.trunk_inputs)
                                            : std::move(stats));
    const int w = config_.width;
    const std::uint64_t seed = config_.seed;
    std::uint64_t stream = 0;
    branch_ = Mlp(config_.branch_inputs, repeat(config_.branch_depth, w), tanh_layers(config_.branch_depth), seed,
                  stream, "branch");
    trunk_ = Mlp(config_.trunk_inputs, repeat(config_.trunk_depth, w), tanh_layers(config_.trunk_depth), seed, stream,
                 "trunk");

    if (config_.arch == Architecture::STONet) {
        for (int l = 0; l < config_.blocks; ++l) {
            const std::string name = "block" + std::to_string(l);
            Block b{DenseLayer(w, w, Activation::Tanh, seed, stream, name + ".mul"),
                    DenseLayer(w, w, Activation::Tanh, seed, stream + 1, name + ".add"),
                    DenseLayer(w, w, Activation::Tanh, seed, stream + 2, name + ".sub"),
                    DenseLayer(3 * w, w, Activation::Tanh, seed, stream + 3, name + ".fuse")};
            stream += 4;
            blocks_.push_back(std::move(b));
        }
    }

    if (config_.arch != Architecture::DeepONet) {
        const int root_in = config_.arch == Architecture::EnDeepONet ? 3 * w : w;
        std::vector<int> widths = repeat(config_.root_depth, w);
        std::vector<Activation> acts = tanh_layers(config_.root_depth);
        widths.push_back(1);
        acts.push_back(Activation::Linear);
        root_ = Mlp(root_in, widths, acts, seed, stream, "root");
    } else {
        bias0_ = Parameter(Matrix::Zero(1, 1), "output.bias");
    }
    collect();
}

OperatorModel::OperatorModel(OperatorModel&& other) noexcept
    : inference_chunk(other.inference_chunk),
      config_(std::move(other.config_)),
      stats_(std::move(other.stats_)),
      branch_(std::move(other.branch_)),
      trunk_(std::move(other.trunk_)),
      blocks_(std::move(other.blocks_)),
      root_(std::move(other.root_)),
      bias0_(std::move(other.bias0_))
{
    collect();
}

OperatorModel& OperatorModel::operator=(OperatorModel&& other) noexcept
{
    inference_chunk = other.inference_chunk;
    config_ = std::move(other.config_);
    stats_ = std::move(other.stats_);
    branch_ = std::move(other.branch_);
    trunk_ = std::move(other.trunk_);
    blocks_ = std::move(other.blocks_);
    root_ = std::move(other.root_);
    bias0_ = std::move(other.bias0_);
    collect();
    return *this;
}

void OperatorModel::collect()
{
    params_.clear();
    branch_.collect(params_);
    trunk_.collect(params_);
    for (auto& b : blocks_) {
        for (DenseLayer* layer : {&b.mul, &b.add, &b.sub, &b.fuse}) {
            params_.push_back(&layer->weight());
            params_.push_back(&layer->bias());
        }
    }
    if (config_.arch == Architecture::DeepONet)
        params_.push_back(&bias0_);
    else
        root_.collect(params_);
}

void OperatorModel::set_stats(NormalizationStats stats)
{
    if (stats.branch_mean.size() != config_.branch_inputs || stats.trunk_mean.size() != config_.trunk_inputs)
        throw ShapeError("operator: normalization stats have " + std::to_string(stats.branch_mean.size()) + "+" +
                         std::to_string(stats.trunk_mean.size()) + " features, model expects " +
                         std::to_string(config_.branch_inputs) + "+" + std::to_string(config_.trunk_inputs));
    stats_ = std::move(stats);
}

std::vector<const Parameter*> OperatorModel::parameters() const
{
    return {params_.begin(), params_.end()};
}

long OperatorModel::parameter_count() const
{
    long n = 0;
    for (const Parameter* p : params_)
        n += static_cast<long>(p->size());
    return n;
}

void OperatorModel::zero_grad()
{
    for (Parameter* p : params_)
        p->zero_grad();
}

Var OperatorModel::combine(Tape& tape, int op, Var b, Var z)
{
    switch (op) {
    case 0: return tape.mul(b, z);
    case 1: return tape.add(b, z);
    default: return config_.branch_minus_state ? tape.sub(b, z) : tape.sub(z, b);
    }
}

Var OperatorModel::forward(Tape& tape, Var branch, Var trunk)
{
    if (tape.value(branch).cols() != config_.branch_inputs || tape.value(trunk).cols() != config_.trunk_inputs)
        throw ShapeError("operator: inputs have " + std::to_string(tape.value(branch).cols()) + " and " +
                         std::to_string(tape.value(trunk).cols()) + " features, expected " +
                         std::to_string(config_.branch_inputs) + " and " + std::to_string(config_.trunk_inputs));
    if (tape.value(branch).rows() != tape.value(trunk).rows())
        throw ShapeError("operator: branch batch " + std::to_string(tape.value(branch).rows()) +
                         " differs from trunk batch " + std::to_string(tape.value(trunk).rows()));

    const Var eb = branch_.forward(tape, branch);
    const Var et = trunk_.forward(tape, trunk);

    switch (config_.arch) {
    case Architecture::DeepONet:
        return tape.add(tape.row_sum(tape.mul(eb, et)), tape.param(bias0_));
    case Architecture::EnDeepONet: {
        const Var merged = tape.concat({combine(tape, 0, eb, et), combine(tape, 1, eb, et), combine(tape, 2, eb, et)});
        return root_.forward(tape, merged);
    }
    case Architecture::STONet:
        break;
    }

    Var z = et;
    std::array<Var, 3> streams{};
    if (config_.fusion == Fusion::LiteralChain)
        for (int op = 0; op < 3; ++op)
            streams[static_cast<std::size_t>(op)] = combine(tape, op, eb, et);
    for (auto& block : blocks_) {
        DenseLayer* phi[3] = {&block.mul, &block.add, &block.sub};
        for (int op = 0; op < 3; ++op) {
            auto& s = streams[static_cast<std::size_t>(op)];
            const Var in = config_.fusion == Fusion::Reinject ? combine(tape, op, eb, z) : s;
            s = phi[op]->forward(tape, in);
        }
        const Var fused = block.fuse.forward(tape, tape.concat({streams[0], streams[1], streams[2]}));
        z = config_.residual ? tape.add(z, fused) : fused;
    }
    return root_.forward(tape, z);
}

Eigen::VectorXd OperatorModel::rates(const Eigen::MatrixXd& branch, const Eigen::MatrixXd& trunk) const
{
    if (branch.rows() != trunk.rows())
        throw ShapeError("operator: branch rows " + std::to_string(branch.rows()) + " differ from trunk rows " +
                         std::to_string(trunk.rows()));
    const Eigen::MatrixXd zb = stats_.normalize_branch(branch);
    const Eigen::MatrixXd zt = stats_.normalize_trunk(trunk);
    auto* self = const_cast<OperatorModel*>(this);  // forward reads parameters only
    Eigen::VectorXd out(branch.rows());
    const auto chunk = static_cast<Eigen::Index>(std::max<std::size_t>(inference_chunk, 1));
    for (Eigen::Index start = 0; start < branch.rows(); start += chunk) {
        const Eigen::Index n = std::min(chunk, branch.rows() - start);
        Tape tape;
        const Var y = self->forward(tape, tape.constant(zb.middleRows(start, n)), tape.constant(zt.middleRows(start, n)));
        out.segment(start, n) = (tape.value(y).col(0).array() * stats_.target_std + stats_.target_mean).matrix();
    }
    return out;
}

std::vector<double> OperatorModel::flat_parameters() const
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(parameter_count()));
    for (const Parameter* p : params_)
        out.insert(out.end(), p->value.data(), p->value.data() + p->value.size());
    return out;
}

void OperatorModel::set_flat_parameters(const std::vector<double>& values)
{
    if (values.size() != static_cast<std::size_t>(parameter_count()))
        throw ShapeError("operator: expected " + std::to_string(parameter_count()) + " parameter values, got " +
                         std::to_string(values.size()));
    std::size_t offset = 0;
    for (Parameter* p : params_) {
        std::copy_n(values.data() + offset, p->value.size(), p->value.data());
        offset += static_cast<std::size_t>(p->value.size());
    }
}

} // namespace stonet
