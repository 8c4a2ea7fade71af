/**
 * @file fem.hpp
 * @brief Small helpers shared by the Q1 assemblers.
 */
#pragma once

#include "stonet/grid.hpp"

#include <Eigen/Dense>

namespace stonet {

/// Nodal field evaluated at every quadrature point.
Eigen::VectorXd interpolate_to_quadrature(const Grid& grid, const Eigen::VectorXd& nodal);

/// Quadrature vectors are stored interleaved: (vx, vy) of point q at [2q, 2q+1].
inline Eigen::Vector2d vector_at(const Eigen::VectorXd& interleaved, int q)
{
    return {interleaved[2 * q], interleaved[2 * q + 1]};
}

/// Area-weighted average of the quadrature value nearest to each node, taken
/// over the elements that share the node. `components` values per point.
Eigen::MatrixXd quadrature_to_nodes(const Grid& grid, const Eigen::MatrixXd& per_point);

} // namespace stonet
