#include "stonet/layers.hpp"

#include "stonet/error.hpp"
#include "stonet/rng.hpp"

#include <cmath>

namespace stonet {

DenseLayer::DenseLayer(int in, int out, Activation act, std::uint64_t seed, std::uint64_t stream_id,
                       const std::string& name)
    : act_(act)
{
    if (in <= 0 || out <= 0)
        throw ConfigError("dense layer " + name + ": dimensions must be positive");
    CounterRng rng{seed, static_cast<std::uint64_t>(RngTag::WeightInit), stream_id};
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Matrix w(in, out);
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            w(i, j) = rng.uniform(-limit, limit);
    weight_ = Parameter(std::move(w), name + ".weight");
    bias_ = Parameter(Matrix::Zero(1, out), name + ".bias");
}

Var DenseLayer::forward(Tape& tape, Var x)
{
    const Var z = tape.dense(x, weight_, bias_);
    return act_ == Activation::Tanh ? tape.tanh(z) : z;
}

Mlp::Mlp(int in, const std::vector<int>& widths, const std::vector<Activation>& acts, std::uint64_t seed,
         std::uint64_t& stream_id, const std::string& name)
{
    if (widths.size() != acts.size())
        throw ConfigError("mlp " + name + ": one activation per layer is required");
    int prev = in;
    for (std::size_t l = 0; l < widths.size(); ++l) {
        layers_.emplace_back(prev, widths[l], acts[l], seed, stream_id++, name + "." + std::to_string(l));
        prev = widths[l];
    }
}

Var Mlp::forward(Tape& tape, Var x)
{
    for (auto& layer : layers_)
        x = layer.forward(tape, x);
    return x;
}

void Mlp::collect(std::vector<Parameter*>& out)
{
    for (auto& layer : layers_) {
        out.push_back(&layer.weight());
        out.push_back(&layer.bias());
    }
}

} // namespace stonet
