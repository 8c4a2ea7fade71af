/**
 * @file test_scenario.cpp
 * @brief Scenario draws, fracture statistics, conversion matrix and the
 *        equivalent permeability field.
 */
#include "stonet/scenario.hpp"
#include "stonet/verify/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace stonet;

TEST_SUITE("scenario") {

TEST_CASE("scenario draws are deterministic and index streams are independent")
{
    const ScenarioParams a = sample_scenario(1, 0);
    const ScenarioParams b = sample_scenario(1, 0);
    CHECK(a.seed == b.seed);
    CHECK(a.mu_theta == b.mu_theta);
    CHECK(a.lambda == b.lambda);
    CHECK(a.p_right_offset == b.p_right_offset);

    const ScenarioParams c = sample_scenario(1, 1);
    CHECK(a.seed != c.seed);
    CHECK(a.mu_theta != c.mu_theta);
    CHECK(a.lambda != c.lambda);
}

TEST_CASE("global draws respect their ranges and lambda has the uniform mean")
{
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const ScenarioParams p = sample_scenario(42, static_cast<std::uint64_t>(i));
        REQUIRE(p.lambda >= 30.0);
        REQUIRE(p.lambda <= 70.0);
        REQUIRE(p.mu_theta >= -60.0);
        REQUIRE(p.mu_theta <= 60.0);
        REQUIRE(p.p_right_offset >= 4976.0);
        REQUIRE(p.p_right_offset <= 4996.0);
        REQUIRE(p.p_left_offset == 4996.0);
        sum += p.lambda;
    }
    const double mean = sum / n;
    CHECK(mean >= 48.0);
    CHECK(mean <= 52.0);
}

TEST_CASE("per-point fracture draws: Poisson count mean and orientation spread")
{
    const Grid grid(70, 50);
    ScenarioParams p = sample_scenario(3, 0);
    p.lambda = 50.0;
    const FractureField f = sample_fractures(p, grid);
    REQUIRE(f.size() == 14000u);

    const double mean_count = std::accumulate(f.count.begin(), f.count.end(), 0.0) / f.size();
    CHECK(mean_count >= 49.0);
    CHECK(mean_count <= 51.0);

    double m = 0.0;
    for (double t : f.theta)
        m += t;
    m /= f.size();
    double var = 0.0;
    for (double t : f.theta)
        var += (t - m) * (t - m);
    const double sd = std::sqrt(var / (f.size() - 1));
    CHECK(sd >= 14.0);
    CHECK(sd <= 16.0);
    CHECK(std::abs(m - p.mu_theta) < 0.5);

    for (std::size_t i = 0; i < f.size(); ++i) {
        REQUIRE(f.length[i] > 0.0);
        REQUIRE(f.aperture[i] > 0.0);
        REQUIRE(f.count[i] >= 0);
    }
}

TEST_CASE("conversion matrix examples")
{
    const Eigen::Matrix2d m0 = conversion_matrix(0.0);
    CHECK(m0(0, 0) == doctest::Approx(1.0));
    CHECK(std::abs(m0(0, 1)) < 1e-15);
    CHECK(std::abs(m0(1, 1)) < 1e-15);

    const Eigen::Matrix2d m90 = conversion_matrix(90.0);
    CHECK(std::abs(m90(0, 0)) < 1e-15);
    CHECK(std::abs(m90(0, 1)) < 1e-15);
    CHECK(m90(1, 1) == doctest::Approx(1.0));

    const Eigen::Matrix2d m45 = conversion_matrix(45.0);
    CHECK(m45(0, 0) == doctest::Approx(0.5));
    CHECK(m45(0, 1) == doctest::Approx(0.5));
    CHECK(m45(1, 0) == doctest::Approx(0.5));
    CHECK(m45(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("conversion matrix is a symmetric rank-one projector for any angle")
{
    for (double theta = -180.0; theta <= 180.0; theta += 7.3) {
        const Eigen::Matrix2d m = conversion_matrix(theta);
        CHECK((m - m.transpose()).norm() < 1e-15);
        CHECK((m * m - m).norm() < 1e-14);
        CHECK(m.trace() == doctest::Approx(1.0));
        const Eigen::Vector2d d(std::cos(theta * M_PI / 180.0), std::sin(theta * M_PI / 180.0));
        CHECK((m * d - d).norm() < 1e-14);
    }
}

TEST_CASE("permeability without fractures is the matrix value")
{
    const Grid grid(10, 10);
    FractureField f = sample_fractures(sample_scenario(5, 0), grid);
    std::fill(f.count.begin(), f.count.end(), 0);
    const PermeabilityField k = equivalent_permeability(f, grid, REVSpec{}, DeterministicParams{});
    for (std::size_t i = 0; i < k.size(); ++i) {
        CHECK(k.kxx[i] == 5.7e-11);
        CHECK(k.kyy[i] == 5.7e-11);
        CHECK(k.kxy[i] == 0.0);
    }
}

TEST_CASE("single-point window reproduces the hand-computed fracture term")
{
    const Grid grid(4, 4);
    FractureField f;
    const auto n = static_cast<std::size_t>(grid.quad_count());
    f.theta.assign(n, 0.0);
    f.count.assign(n, 1);
    f.length.assign(n, 0.05);
    f.aperture.assign(n, 1e-4);
    const REVSpec rev{1e-6, 1e-6, 0.01};
    const PermeabilityField k = equivalent_permeability(f, grid, rev, DeterministicParams{});
    for (std::size_t i = 0; i < k.size(); ++i) {
        CHECK(k.kxx[i] == doctest::Approx(5.7e-11 + 4.1666666666666667e-13).epsilon(1e-12));
        CHECK(k.kyy[i] == doctest::Approx(5.7e-11).epsilon(1e-12));
        CHECK(std::abs(k.kxy[i]) < 1e-28);
    }
}

TEST_CASE("permeability is bounded below by the matrix value and matches the brute-force sum")
{
    const Grid grid(10, 10);
    for (std::uint64_t s = 0; s < 3; ++s) {
        const ScenarioParams p = sample_scenario(11, s);
        const FractureField f = sample_fractures(p, grid);
        const PermeabilityField k = equivalent_permeability(f, grid, REVSpec{}, DeterministicParams{});
        const PermeabilityField o = verify::brute_force_permeability(f, grid, REVSpec{}, DeterministicParams{});
        for (std::size_t i = 0; i < k.size(); ++i) {
            const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(k.at(i));
            CHECK(es.eigenvalues().minCoeff() >= 5.7e-11 - 1e-25);
            CHECK(std::abs(k.kxx[i] - o.kxx[i]) <= 1e-18);
            CHECK(std::abs(k.kxy[i] - o.kxy[i]) <= 1e-18);
        }
    }
}

TEST_CASE("clipped windows see the same fracture density as interior ones")
{
    const Grid grid(20, 14);
    FractureField f;
    const auto n = static_cast<std::size_t>(grid.quad_count());
    f.theta.assign(n, 30.0);
    f.count.assign(n, 3);
    f.length.assign(n, 0.04);
    f.aperture.assign(n, 2e-4);
    const PermeabilityField k = equivalent_permeability(f, grid, REVSpec{}, DeterministicParams{});
    for (std::size_t i = 1; i < n; ++i) {
        CHECK(k.kxx[i] == doctest::Approx(k.kxx[0]).epsilon(1e-13));
        CHECK(k.kxy[i] == doctest::Approx(k.kxy[0]).epsilon(1e-13));
    }
}

TEST_CASE("boundary pressure profiles")
{
    ScenarioParams p;
    p.p_right_offset = 4976.0;
    const BoundaryProfiles bc = boundary_pressure_profiles(p, DeterministicParams{});
    CHECK(bc.right(0.5) == doctest::Approx(9872.171).epsilon(1e-9));
    CHECK(bc.left(0.0) == 4996.0);
    CHECK(p.delta_p() == 20.0);

    p.p_right_offset = p.p_left_offset;
    const BoundaryProfiles eq = boundary_pressure_profiles(p, DeterministicParams{});
    for (double y = 0.0; y <= 0.5; y += 0.05)
        CHECK(eq.left(y) - eq.right(y) == 0.0);
}

TEST_CASE("grid bookkeeping for the reference mesh")
{
    const Grid grid(70, 50);
    CHECK(grid.element_count() == 3500);
    CHECK(grid.node_count() == 3621);
    CHECK(grid.quad_count() == 14000);
    CHECK(grid.dx() == doctest::Approx(0.01));
    CHECK(Grid::parse("35x25").nx() == 35);
    CHECK_THROWS(Grid::parse("35-25"));
}

}

// Kept apart from the main suite: the statistic is dominated by the heavy
// tail of aperture^3, so it is a noisy check of the clipping rule.
TEST_SUITE("scenario-stationarity") {

TEST_CASE("permeability field is stationary up to the boundary")
{
    const Grid grid(70, 50);
    const REVSpec rev;
    double interior = 0.0, boundary = 0.0;
    long n_interior = 0, n_boundary = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        ScenarioParams p = sample_scenario(77, s);
        p.lambda = 50.0;
        const FractureField f = sample_fractures(p, grid);
        const PermeabilityField k = equivalent_permeability(f, grid, rev, DeterministicParams{});
        for (int q = 0; q < grid.quad_count(); ++q) {
            const Point2 x = grid.quad_point(q);
            const double full = rev.window_x * rev.window_y;
            const bool clipped = clipped_window_area(x, grid, rev) < full * (1.0 - 1e-9);
            (clipped ? boundary : interior) += k.kxx[static_cast<std::size_t>(q)];
            ++(clipped ? n_boundary : n_interior);
        }
    }
    interior /= n_interior;
    boundary /= n_boundary;
    CHECK(n_boundary > 0);
    CHECK(std::abs(interior - boundary) / interior < 0.10);
}

}
