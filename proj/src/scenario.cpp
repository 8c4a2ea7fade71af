#include "stonet/scenario.hpp"

#include "stonet/error.hpp"
#include "stonet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stonet {

void DeterministicParams::validate() const
{
    const bool positive = g > 0 && rho0 > 0 && rho_s > 0 && mu > 0 && phi > 0 && d_mol > 0 &&
                          k_r > 0 && alpha_l > 0 && alpha_t > 0 && tau > 0;
    if (!positive)
        throw ConfigError("deterministic parameters must be strictly positive");
    if (alpha_l < alpha_t)
        throw ConfigError("longitudinal dispersivity must be >= transverse dispersivity");
}

Eigen::Matrix2d PermeabilityField::at(std::size_t i) const
{
    Eigen::Matrix2d k;
    k << kxx[i], kxy[i], kxy[i], kyy[i];
    return k;
}

PermeabilityField PermeabilityField::uniform(std::size_t n, double k)
{
    return {std::vector<double>(n, k), std::vector<double>(n, k), std::vector<double>(n, 0.0)};
}

ScenarioParams sample_scenario(std::uint64_t base_seed, std::uint64_t index,
                               const FractureStatistics& stats)
{
    auto stream = [&](RngTag tag) {
        return CounterRng{base_seed, index, static_cast<std::uint64_t>(tag)};
    };
    ScenarioParams p;
    p.base_seed = base_seed;
    p.index = index;
    p.seed = stream(RngTag::ScenarioSeed).next_u64();
    p.mu_theta = stream(RngTag::MeanOrientation).uniform(stats.mu_theta_min, stats.mu_theta_max);
    p.lambda = stream(RngTag::PoissonLambda).uniform(stats.lambda_min, stats.lambda_max);
    p.p_right_offset = stream(RngTag::RightPressure).uniform(stats.p_right_min, stats.p_right_max);
    p.p_left_offset = stats.p_left_offset;
    return p;
}

FractureField sample_fractures(const ScenarioParams& params, const Grid& grid,
                               const FractureStatistics& stats)
{
    const auto length_law = LogNormalParams::from_moments(stats.length_mean, stats.length_std);
    const auto aperture_law = LogNormalParams::from_moments(stats.aperture_mean, stats.aperture_std);

    const auto n = static_cast<std::size_t>(grid.quad_count());
    FractureField f;
    f.theta.resize(n);
    f.count.resize(n);
    f.length.resize(n);
    f.aperture.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        auto stream = [&](RngTag tag) {
            return CounterRng{params.seed, j, static_cast<std::uint64_t>(tag)};
        };
        f.theta[j] = stream(RngTag::Orientation).normal(params.mu_theta, stats.sigma_theta);
        f.count[j] = stream(RngTag::FractureCount).poisson(params.lambda);
        f.length[j] = stream(RngTag::FractureLength).lognormal(length_law.log_mean, length_law.log_stddev);
        f.aperture[j] =
            stream(RngTag::FractureAperture).lognormal(aperture_law.log_mean, aperture_law.log_stddev);
    }
    return f;
}

Eigen::Matrix2d conversion_matrix(double theta_deg)
{
    const double t = theta_deg * std::numbers::pi / 180.0;
    const Eigen::Vector2d normal(-std::sin(t), std::cos(t));
    return Eigen::Matrix2d::Identity() - normal * normal.transpose();
}

namespace {

/// [lo, hi) index range of sorted coordinates lying inside the window around each coordinate.
std::vector<std::pair<int, int>> window_ranges(const std::vector<double>& coords, double half)
{
    const int n = static_cast<int>(coords.size());
    std::vector<std::pair<int, int>> ranges(coords.size());
    int lo = 0;
    int hi = 0;
    for (int c = 0; c < n; ++c) {
        while (lo < n && !within_half_width(coords[c], coords[lo], half) && coords[lo] < coords[c])
            ++lo;
        hi = std::max(hi, lo);
        while (hi < n && within_half_width(coords[c], coords[hi], half))
            ++hi;
        ranges[c] = {lo, hi};
    }
    return ranges;
}

} // namespace

PermeabilityField equivalent_permeability(const FractureField& fractures, const Grid& grid,
                                          const REVSpec& rev, const DeterministicParams& det)
{
    const int cols = 2 * grid.nx();
    const int rows = 2 * grid.ny();
    const auto n = static_cast<std::size_t>(grid.quad_count());
    if (fractures.size() != n)
        throw ShapeError("fracture field size does not match the quadrature count");

    // Summed-area tables of the per-point contribution count * a^3 * l * M.
    const int stride = cols + 1;
    std::vector<double> sxx((rows + 1) * stride, 0.0);
    std::vector<double> syy(sxx.size(), 0.0);
    std::vector<double> sxy(sxx.size(), 0.0);
    for (int r = 0; r < rows; ++r) {
        double rxx = 0.0;
        double ryy = 0.0;
        double rxy = 0.0;
        for (int c = 0; c < cols; ++c) {
            const auto j = static_cast<std::size_t>(grid.quad_at(c, r));
            const double a = fractures.aperture[j];
            const double w = fractures.count[j] * a * a * a * fractures.length[j];
            const Eigen::Matrix2d m = conversion_matrix(fractures.theta[j]);
            rxx += w * m(0, 0);
            ryy += w * m(1, 1);
            rxy += w * m(0, 1);
            const int at = (r + 1) * stride + (c + 1);
            sxx[at] = sxx[at - stride] + rxx;
            syy[at] = syy[at - stride] + ryy;
            sxy[at] = sxy[at - stride] + rxy;
        }
    }

    std::vector<double> xs(cols);
    std::vector<double> ys(rows);
    for (int c = 0; c < cols; ++c)
        xs[c] = grid.quad_column_x(c);
    for (int r = 0; r < rows; ++r)
        ys[r] = grid.quad_row_y(r);
    const auto xr = window_ranges(xs, 0.5 * rev.window_x);
    const auto yr = window_ranges(ys, 0.5 * rev.window_y);

    PermeabilityField k;
    k.kxx.resize(n);
    k.kyy.resize(n);
    k.kxy.resize(n);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const auto [c0, c1] = xr[c];
            const auto [r0, r1] = yr[r];
            const int members = (c1 - c0) * (r1 - r0);
            if (members <= 0)
                throw Error("equivalent_permeability: empty REV window");
            auto box = [&](const std::vector<double>& s) {
                return s[r1 * stride + c1] - s[r0 * stride + c1] - s[r1 * stride + c0] +
                       s[r0 * stride + c0];
            };
            const double scale = 1.0 / (12.0 * rev.volume * members);
            const auto i = static_cast<std::size_t>(grid.quad_at(c, r));
            k.kxx[i] = det.k_r + scale * box(sxx);
            k.kyy[i] = det.k_r + scale * box(syy);
            k.kxy[i] = scale * box(sxy);
        }
    }
    return k;
}

double clipped_window_area(const Point2& centre, const Grid& grid, const REVSpec& rev)
{
    const double wx = std::min(centre.x + 0.5 * rev.window_x, grid.length_x()) -
                      std::max(centre.x - 0.5 * rev.window_x, 0.0);
    const double wy = std::min(centre.y + 0.5 * rev.window_y, grid.length_y()) -
                      std::max(centre.y - 0.5 * rev.window_y, 0.0);
    return std::max(wx, 0.0) * std::max(wy, 0.0);
}

BoundaryProfiles boundary_pressure_profiles(const ScenarioParams& params,
                                            const DeterministicParams& det)
{
    return {params.p_left_offset, params.p_right_offset, det.hydrostatic_gradient()};
}

Scenario generate_scenario(std::uint64_t base_seed, std::uint64_t index, const Grid& grid,
                           const DeterministicParams& det, const REVSpec& rev,
                           const FractureStatistics& stats)
{
    det.validate();
    Scenario s;
    s.params = sample_scenario(base_seed, index, stats);
    s.det = det;
    s.rev = rev;
    s.fractures = sample_fractures(s.params, grid, stats);
    s.permeability = equivalent_permeability(s.fractures, grid, rev, det);
    return s;
}

} // namespace stonet
