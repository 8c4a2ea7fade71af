#include "stonet/physics.hpp"

#include <algorithm>

namespace stonet {

double density_of(double c, const DeterministicParams& det)
{
    const double clamped = std::clamp(c, 0.0, 1.0);
    return det.rho0 + (det.rho_s - det.rho0) * clamped;
}

Eigen::Vector2d darcy_velocity(const Eigen::Vector2d& grad_p, double rho, const Eigen::Matrix2d& k,
                               const DeterministicParams& det)
{
    const Eigen::Vector2d drive = grad_p - rho * gravity_vector(det);
    return -(k * drive) / det.mu;
}

Eigen::Matrix2d dispersion_tensor(const Eigen::Vector2d& v, const DeterministicParams& det)
{
    const double speed = v.norm();
    Eigen::Matrix2d d = (det.phi * det.tau * det.d_mol + det.alpha_t * speed) * Eigen::Matrix2d::Identity();
    if (speed > 0.0)
        d += (det.alpha_l - det.alpha_t) * (v * v.transpose()) / speed;
    return d;
}

} // namespace stonet
