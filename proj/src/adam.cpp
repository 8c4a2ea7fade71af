#include "stonet/adam.hpp"

#include "stonet/error.hpp"

#include <cmath>

namespace stonet {

Adam::Adam(std::vector<Parameter*> params, AdamConfig config) : params_(std::move(params)), config_(config)
{
    if (!(config_.lr >= 0.0) || !(config_.beta1 >= 0.0 && config_.beta1 < 1.0) ||
        !(config_.beta2 >= 0.0 && config_.beta2 < 1.0) || !(config_.eps > 0.0) || !(config_.weight_decay >= 0.0))
        throw ConfigError("adam: invalid hyper-parameters");
    for (const Parameter* p : params_) {
        m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
}

void Adam::zero_grad()
{
    for (Parameter* p : params_)
        p->zero_grad();
}

void Adam::step()
{
    for (const Parameter* p : params_) {
        if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols())
            throw ShapeError("adam: gradient shape of " + p->name + " does not match its value");
        if (!p->grad.allFinite())
            throw TrainingError("adam: non-finite gradient in " + p->name);
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Parameter& p = *params_[i];
        Matrix g = p.grad;
        if (config_.weight_decay > 0.0)
            g += config_.weight_decay * p.value;
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseAbs2();
        p.value.array() -= config_.lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + config_.eps);
    }
}

} // namespace stonet
