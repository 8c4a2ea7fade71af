#include "stonet/fem.hpp"

namespace stonet {

Eigen::VectorXd interpolate_to_quadrature(const Grid& grid, const Eigen::VectorXd& nodal)
{
    const auto& basis = grid.basis();
    Eigen::VectorXd out(grid.quad_count());
    for (int e = 0; e < grid.element_count(); ++e) {
        const auto nodes = grid.element_nodes(e);
        for (int q = 0; q < 4; ++q) {
            double s = 0.0;
            for (int a = 0; a < 4; ++a)
                s += basis.value[q][a] * nodal[nodes[a]];
            out[4 * e + q] = s;
        }
    }
    return out;
}

Eigen::MatrixXd quadrature_to_nodes(const Grid& grid, const Eigen::MatrixXd& per_point)
{
    // Local node a sits in the corner nearest to Gauss point q == a with the
    // (a -> q) map below, since nodes run counter-clockwise and points row-major.
    static constexpr int kNearest[4] = {0, 1, 3, 2};
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(grid.node_count(), per_point.cols());
    Eigen::VectorXd weight = Eigen::VectorXd::Zero(grid.node_count());
    const double w = grid.quad_weight();
    for (int e = 0; e < grid.element_count(); ++e) {
        const auto nodes = grid.element_nodes(e);
        for (int a = 0; a < 4; ++a) {
            sum.row(nodes[a]) += w * per_point.row(4 * e + kNearest[a]);
            weight[nodes[a]] += w;
        }
    }
    for (int n = 0; n < grid.node_count(); ++n)
        sum.row(n) /= weight[n];
    return sum;
}

} // namespace stonet
