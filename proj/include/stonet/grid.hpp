/**
 * @file grid.hpp
 * @brief Structured Q1 mesh of the rectangular domain with 2x2 Gauss quadrature.
 *
 * Coordinates: x to the right, y measured downward from the top boundary.
 * Nodes are numbered row-major (node = j * (nx + 1) + i), elements likewise
 * (element = j * nx + i), and quadrature point q of element e has global
 * index 4 * e + q with q = 2 * b + a for local Gauss positions (xi_a, eta_b).
 */
#pragma once

#include <array>
#include <string>
#include <string_view>

namespace stonet {

struct Point2 {
    double x;
    double y;
};

/// Q1 shape functions and gradients at the four Gauss points of a rectangle.
struct Q1Basis {
    std::array<std::array<double, 4>, 4> value{};  // [q][a]
    std::array<std::array<double, 4>, 4> dx{};     // d/dx, physical
    std::array<std::array<double, 4>, 4> dy{};     // d/dy, physical
    double weight = 0.0;                           // Gauss weight times |J|
};

class Grid {
public:
    static constexpr double kGauss = 0.57735026918962576451;

    Grid(int nx, int ny, double length_x = 0.7, double length_y = 0.5);

    /// Parses "70x50" (default 0.7 m x 0.5 m domain).
    static Grid parse(std::string_view spec, double length_x = 0.7, double length_y = 0.5);
    std::string spec() const;

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }
    double length_x() const { return lx_; }
    double length_y() const { return ly_; }

    int node_count() const { return (nx_ + 1) * (ny_ + 1); }
    int element_count() const { return nx_ * ny_; }
    int quad_count() const { return 4 * element_count(); }

    int node(int i, int j) const { return j * (nx_ + 1) + i; }
    int node_i(int n) const { return n % (nx_ + 1); }
    int node_j(int n) const { return n / (nx_ + 1); }
    Point2 node_point(int n) const { return {node_i(n) * dx_, node_j(n) * dy_}; }

    /// Element nodes counter-clockwise in (xi, eta): (i,j), (i+1,j), (i+1,j+1), (i,j+1).
    std::array<int, 4> element_nodes(int e) const;

    /// Quadrature lattice has 2*nx columns and 2*ny rows.
    int quad_column(int qp) const;
    int quad_row(int qp) const;
    /// Global quadrature index of lattice position (column, row).
    int quad_at(int column, int row) const;
    double quad_column_x(int column) const;
    double quad_row_y(int row) const;
    Point2 quad_point(int qp) const { return {quad_column_x(quad_column(qp)), quad_row_y(quad_row(qp))}; }
    double quad_weight() const { return 0.25 * dx_ * dy_; }

    const Q1Basis& basis() const { return basis_; }

    bool operator==(const Grid& other) const;

private:
    int nx_;
    int ny_;
    double lx_;
    double ly_;
    double dx_;
    double dy_;
    Q1Basis basis_;
};

} // namespace stonet
