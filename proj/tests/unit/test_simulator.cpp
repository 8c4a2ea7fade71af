/**
 * @file test_simulator.cpp
 * @brief Constitutive laws, pressure and transport steps, and full runs.
 */
#include "stonet/error.hpp"
#include "stonet/physics.hpp"
#include "stonet/pressure.hpp"
#include "stonet/simulation.hpp"
#include "stonet/transport.hpp"
#include "stonet/verify/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace stonet;

namespace {

Scenario uniform_scenario(const Grid& grid, double dp)
{
    Scenario s;
    s.params.p_left_offset = 4996.0;
    s.params.p_right_offset = 4996.0 - dp;
    s.permeability = PermeabilityField::uniform(static_cast<std::size_t>(grid.quad_count()), s.det.k_r);
    return s;
}

double plume_depth(const Grid& grid, const Eigen::VectorXd& c)
{
    double m = 0.0, my = 0.0;
    for (int n = 0; n < grid.node_count(); ++n) {
        m += c[n];
        my += c[n] * grid.node_point(n).y;
    }
    return my / m;
}

} // namespace

TEST_SUITE("simulator") {

TEST_CASE("linear density law")
{
    const DeterministicParams det;
    CHECK(density_of(0.0, det) == doctest::Approx(998.2));
    CHECK(density_of(1.0, det) == doctest::Approx(1002.0));
    CHECK(density_of(0.5, det) == doctest::Approx(1000.1));
}

TEST_CASE("Darcy velocity examples")
{
    const DeterministicParams det;
    const double rho = det.rho0;
    const Eigen::Matrix2d iso = Eigen::Matrix2d::Identity() * 5.7e-11;

    const Eigen::Vector2d v0 = darcy_velocity({0.0, rho * det.g}, rho, iso, det);
    CHECK(v0.norm() < 1e-18);

    const Eigen::Vector2d v1 = darcy_velocity({-20.0 / 0.7, rho * det.g}, rho, iso, det);
    CHECK(v1.x() == doctest::Approx(1.625e-6).epsilon(1e-3));
    CHECK(std::abs(v1.y()) < 1e-18);

    Eigen::Matrix2d aniso;
    aniso << 2e-11, 1e-12, 1e-12, 1e-11;
    const Eigen::Vector2d v2 = darcy_velocity({-10.0, rho * det.g}, rho, aniso, det);
    CHECK(v2.x() == doctest::Approx(1.996e-7).epsilon(1e-3));
    CHECK(v2.y() == doctest::Approx(9.98e-9).epsilon(1e-3));
}

TEST_CASE("dispersion tensor examples")
{
    DeterministicParams det;
    const Eigen::Matrix2d d0 = dispersion_tensor({0.0, 0.0}, det);
    CHECK(d0(0, 0) == doctest::Approx(6.118e-10));
    CHECK(d0(1, 1) == doctest::Approx(6.118e-10));
    CHECK(d0(0, 1) == 0.0);

    const Eigen::Matrix2d d1 = dispersion_tensor({1e-6, 0.0}, det);
    CHECK(d1(0, 0) == doctest::Approx(1.6118e-9));
    CHECK(d1(1, 1) == doctest::Approx(8.118e-10));

    det.alpha_t = det.alpha_l;
    const Eigen::Matrix2d d2 = dispersion_tensor({3e-7, -8e-7}, det);
    CHECK(std::abs(d2(0, 1)) < 1e-25);
    CHECK(d2(0, 0) == doctest::Approx(d2(1, 1)));
}

TEST_CASE("hydrostatic pressure with uniform permeability is exact")
{
    const Grid grid(35, 25);
    const Scenario s = uniform_scenario(grid, 0.0);
    const Eigen::VectorXd c = Eigen::VectorXd::Zero(grid.node_count());
    const PressureSolution sol =
        solve_pressure(c, s.permeability, boundary_pressure_profiles(s.params, s.det), grid, s.det);
    for (int n = 0; n < grid.node_count(); ++n)
        CHECK(sol.p[n] == doctest::Approx(4996.0 + s.det.rho0 * s.det.g * grid.node_point(n).y).epsilon(1e-12));
    CHECK(sol.v.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("uniform drive gives the one-dimensional Darcy flux")
{
    const Grid grid(35, 25);
    const Scenario s = uniform_scenario(grid, 20.0);
    const Eigen::VectorXd c = Eigen::VectorXd::Zero(grid.node_count());
    const PressureSolution sol =
        solve_pressure(c, s.permeability, boundary_pressure_profiles(s.params, s.det), grid, s.det);
    for (int q = 0; q < grid.quad_count(); ++q) {
        CHECK(sol.v[2 * q] == doctest::Approx(1.625e-6).epsilon(1e-3));
        CHECK(std::abs(sol.v[2 * q] - sol.v[0]) < 1e-9);
        CHECK(std::abs(sol.v[2 * q + 1]) < 1e-12);
    }
    for (int n = 0; n < grid.node_count(); ++n) {
        const Point2 x = grid.node_point(n);
        const double q = sol.p[n] - s.det.rho0 * s.det.g * x.y;
        CHECK(q == doctest::Approx(4996.0 - 20.0 * x.x / 0.7).epsilon(1e-10));
    }
}

TEST_CASE("manufactured pressure solution converges at second order")
{
    const verify::ConvergenceStudy study = verify::pressure_convergence({14, 28, 56}, {10, 20, 40});
    REQUIRE(study.order.size() == 2u);
    for (double o : study.order) {
        CHECK(o > 1.7);
        CHECK(o < 2.3);
    }
}

TEST_CASE("transport keeps a constant state constant")
{
    const Grid grid(20, 15);
    const DeterministicParams det;
    const auto nq = grid.quad_count();
    const Eigen::VectorXd c = Eigen::VectorXd::Ones(grid.node_count());
    Eigen::VectorXd v(2 * nq);
    for (int q = 0; q < nq; ++q) {
        v[2 * q] = 2e-6;
        v[2 * q + 1] = 0.0;
    }
    const Eigen::VectorXd rho = Eigen::VectorXd::Constant(nq, density_of(1.0, det));
    TransportOptions opt;
    opt.band_top = 0.0;
    opt.band_bottom = 0.5;
    for (auto stab : {Stabilization::Upwind, Stabilization::Supg, Stabilization::None}) {
        opt.stabilization = stab;
        const TransportResult r = step_transport(c, v, rho, rho, grid, det, 1200.0, opt);
        CHECK((r.c.array() - 1.0).abs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("pure diffusion follows the complementary error function")
{
    CHECK(verify::diffusion_profile_error(Grid(70, 50), 4.0) < 0.02);
}

TEST_CASE("full run: bookkeeping, bounds, conservation and determinism")
{
    const Grid grid(70, 50);
    const Scenario s = generate_scenario(9, 0, grid);
    const SolverConfig cfg;
    CHECK(cfg.steps() == 108);
    const TimeSeries a = run_simulation(s, grid, cfg);
    REQUIRE(a.size() == 10u);
    for (std::size_t k = 0; k < a.size(); ++k)
        CHECK(a.times_h[k] == 4.0 * k);
    CHECK(a.steps.size() == 108u);
    for (const auto& c : a.c) {
        CHECK(c.minCoeff() >= -1e-3);
        CHECK(c.maxCoeff() <= 1.0 + 1e-3);
    }
    for (const auto& st : a.steps)
        CHECK(st.balance_error <= 1e-8);

    const TimeSeries b = run_simulation(s, grid, cfg);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.c[k] == b.c[k]);
        CHECK(a.p[k] == b.p[k]);
        CHECK(a.v[k] == b.v[k]);
    }
}

TEST_CASE("without a pressure drop the dense plume sinks")
{
    const Grid grid(35, 25);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Scenario s = generate_scenario(21, seed, grid);
        s.params.p_right_offset = s.params.p_left_offset;
        const TimeSeries ts = run_simulation(s, grid);
        double prev = plume_depth(grid, ts.c[1]);
        for (std::size_t k = 2; k < ts.size(); ++k) {
            const double d = plume_depth(grid, ts.c[k]);
            CHECK(d >= prev - 1e-12);
            prev = d;
        }
    }
}

TEST_CASE("invalid solver configuration is rejected")
{
    SolverConfig cfg;
    cfg.dt = -1.0;
    CHECK_THROWS(cfg.validate());
    cfg = SolverConfig{};
    cfg.record_interval = 1000.0;
    CHECK_THROWS(cfg.validate());
}

}
