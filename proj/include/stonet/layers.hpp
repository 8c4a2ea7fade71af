/**
 * @file layers.hpp
 * @brief Fully connected layers and stacks built on the tape.
 */
#pragma once

#include "stonet/autodiff.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stonet {

enum class Activation { Tanh, Linear };

class DenseLayer {
public:
    DenseLayer() = default;
    /// Glorot-uniform weights from the stream (seed, WeightInit, stream_id); zero bias.
    DenseLayer(int in, int out, Activation act, std::uint64_t seed, std::uint64_t stream_id, const std::string& name);

    Var forward(Tape& tape, Var x);

    int in() const { return static_cast<int>(weight_.value.rows()); }
    int out() const { return static_cast<int>(weight_.value.cols()); }
    Activation activation() const { return act_; }
    Parameter& weight() { return weight_; }
    Parameter& bias() { return bias_; }
    const Parameter& weight() const { return weight_; }
    const Parameter& bias() const { return bias_; }

    static long parameter_count(int in, int out) { return static_cast<long>(in) * out + out; }

private:
    Parameter weight_;  // in x out
    Parameter bias_;    // 1 x out
    Activation act_ = Activation::Tanh;
};

/// A chain of dense layers; `widths` has one entry per layer output.
class Mlp {
public:
    Mlp() = default;
    Mlp(int in, const std::vector<int>& widths, const std::vector<Activation>& acts, std::uint64_t seed,
        std::uint64_t& stream_id, const std::string& name);

    Var forward(Tape& tape, Var x);
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    void collect(std::vector<Parameter*>& out);

private:
    std::vector<DenseLayer> layers_;
};

} // namespace stonet
