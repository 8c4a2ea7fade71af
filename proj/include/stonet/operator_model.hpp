/**
 * @file operator_model.hpp
 * @brief DeepONet, En-DeepONet and STONet operator networks.
 *
 * All three share a branch network B over the pointwise input features u and a
 * trunk network T over the query (x, y, t); every layer of both is dense+tanh
 * with `width` outputs, so the encodings eB = B(u) and eT = T(x) have equal
 * dimension.
 *
 *  - DeepONet:    G = sum_j eB_j eT_j + b0.
 *  - En-DeepONet: G = R([eB*eT, eB+eT, eB-eT]).
 *  - STONet:      eZ_0 = eT; for l = 1..L
 *                   s_op = Phi_op,l(eB op eZ_{l-1})           (reinject)
 *                   s_op = Phi_op,l(s_op at l-1), s_op,0 = eB op eT  (literal chain)
 *                   eZ_l = [eZ_{l-1} +] Phi_l([s_mul, s_add, s_sub])
 *                 G = R(eZ_L).
 * R has `root_depth` dense+tanh layers followed by a linear layer to one output.
 * The network predicts the normalized rate; `predict_rates` maps back to 1/h.
 */
#pragma once

#include "stonet/autodiff.hpp"
#include "stonet/dataset.hpp"
#include "stonet/json_io.hpp"
#include "stonet/layers.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace stonet {

enum class Architecture { DeepONet, EnDeepONet, STONet };
enum class Fusion { Reinject, LiteralChain };

const char* architecture_name(Architecture a);
Architecture parse_architecture(const std::string& s);
const char* fusion_name(Fusion f);
Fusion parse_fusion(const std::string& s);

struct OperatorConfig {
    Architecture arch = Architecture::STONet;
    int width = 100;
    int branch_depth = 8;
    int trunk_depth = 8;
    int root_depth = 2;
    /// Attention blocks; 0 reduces STONet to R(T(x)).
    int blocks = 8;
    Fusion fusion = Fusion::Reinject;
    bool residual = true;
    /// true: eB - eZ; false: eZ - eB.
    bool branch_minus_state = true;
    int branch_inputs = 4;
    int trunk_inputs = kTrunkDim;
    std::uint64_t seed = 0;

    void validate() const;
    Json to_json() const;
    static OperatorConfig from_json(const Json& j);
};

/// Closed-form trainable parameter count; see README for the formula.
long parameter_count(const OperatorConfig& config);

/// Interface used by rollout and evaluation: raw features in, rates (1/h) out.
class RateModel {
public:
    virtual ~RateModel() = default;
    /// branch: n x nb raw features, trunk: n x 3 raw (x m, y m, t h).
    virtual Eigen::VectorXd rates(const Eigen::MatrixXd& branch, const Eigen::MatrixXd& trunk) const = 0;
};

class OperatorModel : public RateModel {
public:
    /// Empty `stats` means identity normalization of the configured input widths.
    explicit OperatorModel(const OperatorConfig& config, NormalizationStats stats = {});

    OperatorModel(const OperatorModel&) = delete;
    OperatorModel& operator=(const OperatorModel&) = delete;
    OperatorModel(OperatorModel&& other) noexcept;
    OperatorModel& operator=(OperatorModel&& other) noexcept;

    /// Normalized inputs in, normalized rate (batch x 1) out.
    Var forward(Tape& tape, Var branch, Var trunk);

    Eigen::VectorXd rates(const Eigen::MatrixXd& branch, const Eigen::MatrixXd& trunk) const override;

    /// Fixed parameter order: branch, trunk, blocks (mul, add, sub, fusion), root, output bias.
    const std::vector<Parameter*>& parameters() { return params_; }
    std::vector<const Parameter*> parameters() const;
    long parameter_count() const;
    void zero_grad();

    const OperatorConfig& config() const { return config_; }
    const NormalizationStats& stats() const { return stats_; }
    void set_stats(NormalizationStats stats);

    /// Flattened parameter values in parameter order, column-major within each tensor.
    std::vector<double> flat_parameters() const;
    void set_flat_parameters(const std::vector<double>& values);

    std::size_t inference_chunk = 4096;

private:
    void collect();
    Var combine(Tape& tape, int op, Var b, Var z);

    OperatorConfig config_;
    NormalizationStats stats_;
    Mlp branch_;
    Mlp trunk_;
    struct Block {
        DenseLayer mul, add, sub, fuse;
    };
    std::vector<Block> blocks_;
    Mlp root_;
    Parameter bias0_;  // DeepONet output bias
    std::vector<Parameter*> params_;
};

} // namespace stonet
