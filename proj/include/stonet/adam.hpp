/**
 * @file adam.hpp
 * @brief Bias-corrected Adam over a fixed list of parameters.
 */
#pragma once

#include "stonet/autodiff.hpp"

#include <vector>

namespace stonet {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    /// L2 penalty added to the gradient; 0 disables regularization.
    double weight_decay = 0.0;
};

class Adam {
public:
    Adam(std::vector<Parameter*> params, AdamConfig config = {});

    /// Throws TrainingError, leaving every parameter untouched, if any gradient is not finite.
    void step();
    void zero_grad();

    long step_count() const { return t_; }
    const AdamConfig& config() const { return config_; }
    void set_lr(double lr) { config_.lr = lr; }
    const std::vector<Matrix>& first_moment() const { return m_; }
    const std::vector<Matrix>& second_moment() const { return v_; }

private:
    std::vector<Parameter*> params_;
    AdamConfig config_;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
    long t_ = 0;
};

} // namespace stonet
