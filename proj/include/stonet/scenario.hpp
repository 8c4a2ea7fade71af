/**
 * @file scenario.hpp
 * @brief Stochastic micro-fracture fields, boundary draws and the equivalent
 *        continuum permeability tensor.
 */
#pragma once

#include "stonet/grid.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace stonet {

/// Fluid, matrix and dispersion constants. Defaults are the reference values.
struct DeterministicParams {
    double g = 9.81;          // m/s^2
    double rho0 = 998.2;      // kg/m^3, water
    double rho_s = 1002.0;    // kg/m^3, brine
    double mu = 1.002e-3;     // Pa s
    double phi = 0.38;        // porosity
    double d_mol = 1.61e-9;   // m^2/s
    double k_r = 5.7e-11;     // m^2
    double alpha_l = 1e-3;    // m
    double alpha_t = 2e-4;    // m
    double tau = 1.0;         // tortuosity

    void validate() const;
    /// rho0 * g, the hydrostatic pressure gradient of fresh water.
    double hydrostatic_gradient() const { return rho0 * g; }
};

/// Distribution parameters for the global and per-point draws.
struct FractureStatistics {
    double mu_theta_min = -60.0;   // degrees
    double mu_theta_max = 60.0;
    double sigma_theta = 15.0;     // degrees
    double lambda_min = 30.0;      // fractures per REV
    double lambda_max = 70.0;
    double p_right_min = 4976.0;   // Pa
    double p_right_max = 4996.0;
    double p_left_offset = 4996.0; // Pa
    // Mean and standard deviation of the fracture length and aperture (m);
    // the log-normal laws are moment matched to these.
    double length_mean = 0.05;
    double length_std = 0.0575;
    double aperture_mean = 1.14e-4;
    double aperture_std = 1.725e-4;
};

struct ScenarioParams {
    std::uint64_t base_seed = 0;
    std::uint64_t index = 0;
    std::uint64_t seed = 0;        // keys the per-point fracture streams
    double mu_theta = 0.0;         // degrees
    double lambda = 50.0;
    double p_right_offset = 4996.0;
    double p_left_offset = 4996.0;

    /// p_left_offset - p_right_offset, the branch feature.
    double delta_p() const { return p_left_offset - p_right_offset; }
};

/// One draw per quadrature point.
struct FractureField {
    std::vector<double> theta;     // degrees, counter-clockwise from +x
    std::vector<int> count;        // co-located fractures
    std::vector<double> length;    // m
    std::vector<double> aperture;  // m

    std::size_t size() const { return theta.size(); }
};

struct REVSpec {
    double window_x = 0.10;  // m
    double window_y = 0.10;  // m
    double volume = 0.01;    // m^2, REV measure for an unclipped window

    static REVSpec square(double side) { return {side, side, side * side}; }
};

/// Membership rule for the REV window, shared by every implementation of the sum.
inline bool within_half_width(double center, double point, double half_width)
{
    const double d = point - center;
    const double h = half_width * (1.0 + 1e-9);
    return d <= h && -d <= h;
}

/// Symmetric 2x2 tensor per quadrature point.
struct PermeabilityField {
    std::vector<double> kxx;
    std::vector<double> kyy;
    std::vector<double> kxy;

    std::size_t size() const { return kxx.size(); }
    Eigen::Matrix2d at(std::size_t i) const;
    static PermeabilityField uniform(std::size_t n, double k);
};

/// Global draws for scenario `index`; independent streams per (base_seed, index).
ScenarioParams sample_scenario(std::uint64_t base_seed, std::uint64_t index,
                               const FractureStatistics& stats = {});

FractureField sample_fractures(const ScenarioParams& params, const Grid& grid,
                               const FractureStatistics& stats = {});

/// I - n n^T for the unit normal of a fracture oriented theta_deg from +x.
Eigen::Matrix2d conversion_matrix(double theta_deg);

/// Equivalent continuum permeability at every quadrature point.
///
/// k(i) = k_r I + 1 / (12 V) * mean_{j in W(i)} count_j a_j^3 l_j M(theta_j),
/// where W(i) is the set of quadrature points inside the REV window centred on
/// i (clipped to the domain) and V is the full REV volume. Averaging over the
/// clipped set already rescales the fracture count to the clipped measure, so
/// windows near the boundary see the same fracture density as interior ones.
PermeabilityField equivalent_permeability(const FractureField& fractures, const Grid& grid,
                                          const REVSpec& rev, const DeterministicParams& det);

/// Clipped REV area around a point, for diagnostics.
double clipped_window_area(const Point2& centre, const Grid& grid, const REVSpec& rev);

/// Hydrostatic Dirichlet profiles p(y) = offset + rho0 g y on the left and right walls.
struct BoundaryProfiles {
    double left_offset;
    double right_offset;
    double gradient;

    double left(double y) const { return left_offset + gradient * y; }
    double right(double y) const { return right_offset + gradient * y; }
};

BoundaryProfiles boundary_pressure_profiles(const ScenarioParams& params,
                                            const DeterministicParams& det);

/// Everything the simulator needs for one realization.
struct Scenario {
    ScenarioParams params;
    DeterministicParams det;
    REVSpec rev;
    FractureField fractures;
    PermeabilityField permeability;
};

Scenario generate_scenario(std::uint64_t base_seed, std::uint64_t index, const Grid& grid,
                           const DeterministicParams& det = {}, const REVSpec& rev = {},
                           const FractureStatistics& stats = {});

} // namespace stonet
