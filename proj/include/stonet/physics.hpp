/**
 * @file physics.hpp
 * @brief Pointwise constitutive laws: density, Darcy velocity, dispersion.
 */
#pragma once

#include "stonet/scenario.hpp"

#include <Eigen/Dense>

namespace stonet {

/// Linear equation of state rho0 + (rho_s - rho0) c, with c clamped to [0, 1].
double density_of(double c, const DeterministicParams& det);

/// Gravity vector in the downward-y convention.
inline Eigen::Vector2d gravity_vector(const DeterministicParams& det)
{
    return {0.0, det.g};
}

/// v = -(k / mu) (grad p - rho g).
Eigen::Vector2d darcy_velocity(const Eigen::Vector2d& grad_p, double rho, const Eigen::Matrix2d& k,
                               const DeterministicParams& det);

/// D = phi tau D_mol I + (alpha_L - alpha_T) v v^T / |v| + alpha_T |v| I.
Eigen::Matrix2d dispersion_tensor(const Eigen::Vector2d& v, const DeterministicParams& det);

} // namespace stonet
