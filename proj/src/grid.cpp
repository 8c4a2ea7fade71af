#include "stonet/grid.hpp"

#include "stonet/error.hpp"

#include <charconv>

namespace stonet {

namespace {

constexpr std::array<double, 4> kXiNode{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kEtaNode{-1.0, -1.0, 1.0, 1.0};

} // namespace

Grid::Grid(int nx, int ny, double length_x, double length_y)
    : nx_(nx), ny_(ny), lx_(length_x), ly_(length_y)
{
    if (nx < 1 || ny < 1 || !(length_x > 0.0) || !(length_y > 0.0))
        throw ConfigError("grid: element counts and lengths must be positive");
    dx_ = lx_ / nx_;
    dy_ = ly_ / ny_;

    for (int q = 0; q < 4; ++q) {
        const double xi = (q % 2 == 0 ? -kGauss : kGauss);
        const double eta = (q / 2 == 0 ? -kGauss : kGauss);
        for (int a = 0; a < 4; ++a) {
            const double fx = 1.0 + kXiNode[a] * xi;
            const double fy = 1.0 + kEtaNode[a] * eta;
            basis_.value[q][a] = 0.25 * fx * fy;
            basis_.dx[q][a] = 0.25 * kXiNode[a] * fy * (2.0 / dx_);
            basis_.dy[q][a] = 0.25 * kEtaNode[a] * fx * (2.0 / dy_);
        }
    }
    basis_.weight = 0.25 * dx_ * dy_;
}

Grid Grid::parse(std::string_view spec, double length_x, double length_y)
{
    const auto sep = spec.find('x');
    if (sep == std::string_view::npos)
        throw ConfigError("grid spec must look like 70x50, got '" + std::string(spec) + "'");
    int nx = 0;
    int ny = 0;
    const auto a = spec.substr(0, sep);
    const auto b = spec.substr(sep + 1);
    auto r1 = std::from_chars(a.data(), a.data() + a.size(), nx);
    auto r2 = std::from_chars(b.data(), b.data() + b.size(), ny);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r1.ptr != a.data() + a.size() ||
        r2.ptr != b.data() + b.size())
        throw ConfigError("grid spec must look like 70x50, got '" + std::string(spec) + "'");
    return Grid(nx, ny, length_x, length_y);
}

std::string Grid::spec() const
{
    return std::to_string(nx_) + "x" + std::to_string(ny_);
}

std::array<int, 4> Grid::element_nodes(int e) const
{
    const int i = e % nx_;
    const int j = e / nx_;
    return {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
}

int Grid::quad_column(int qp) const
{
    const int e = qp / 4;
    return 2 * (e % nx_) + (qp % 4) % 2;
}

int Grid::quad_row(int qp) const
{
    const int e = qp / 4;
    return 2 * (e / nx_) + (qp % 4) / 2;
}

int Grid::quad_at(int column, int row) const
{
    const int e = (row / 2) * nx_ + column / 2;
    return 4 * e + 2 * (row % 2) + column % 2;
}

double Grid::quad_column_x(int column) const
{
    const double xi = (column % 2 == 0 ? -kGauss : kGauss);
    return dx_ * (column / 2 + 0.5 * (1.0 + xi));
}

double Grid::quad_row_y(int row) const
{
    const double eta = (row % 2 == 0 ? -kGauss : kGauss);
    return dy_ * (row / 2 + 0.5 * (1.0 + eta));
}

bool Grid::operator==(const Grid& other) const
{
    return nx_ == other.nx_ && ny_ == other.ny_ && lx_ == other.lx_ && ly_ == other.ly_;
}

} // namespace stonet
