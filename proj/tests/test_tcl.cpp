#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "spinbath/tcl.hpp"

using namespace spinbath;
using Catch::Approx;

TEST_CASE("coefficients of the exponential special case", "[tcl]") {
    const TimeGrid grid(2.0, 2000);
    const auto coeffs = coefficients(analytic_exponential(1.0, 2.0, grid));

    CHECK(coeffs.rate[0] == Approx(0.0).margin(1e-14));   // dG~(0) = 0
    CHECK(coeffs.shift[0] == Approx(0.0).margin(1e-14));  // -2h with h = 0

    // gamma(t) = 2 Gamma^2 t / (1 + Gamma t); at Gamma t = 1 this is Gamma
    CHECK(coeffs.rate[1000] == Approx(1.0).margin(1e-10));

    // real G~ means S(t) = 0 for all t
    for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
        REQUIRE(coeffs.valid[k]);
        CHECK(std::abs(coeffs.shift[k]) <= 1e-12);
    }
}

TEST_CASE("coefficients include the overhauser shift at t = 0", "[tcl]") {
    const TimeGrid grid(1.0, 100);
    const auto coeffs = coefficients(analytic_box(0.7, 3.0, 4, grid));
    CHECK(coeffs.h == Approx(1.5));
    CHECK(coeffs.rate[0] == Approx(0.0).margin(1e-12));
    CHECK(coeffs.shift[0] == Approx(-3.0).margin(1e-12)); // -2h
    CHECK(coeffs.rotating_shift(0) == Approx(0.0).margin(1e-12));
}

TEST_CASE("coefficients mask fidelity zeros", "[tcl]") {
    PropagatorSeries series;
    series.grid = TimeGrid(3.0, 3);
    series.g_tilde = {Complex(1.0), Complex(0.5), Complex(1e-9), Complex(0.2)};
    series.dg_tilde = {Complex(0.0), Complex(-0.1), Complex(-0.1), Complex(0.1)};
    const auto coeffs = coefficients(series);
    CHECK(coeffs.valid[0]);
    CHECK(coeffs.valid[1]);
    CHECK_FALSE(coeffs.valid[2]);
    CHECK(coeffs.valid[3]);
    CHECK(std::isnan(coeffs.rate[2]));
}

TEST_CASE("analytic gamma for the exponential kernel", "[tcl]") {
    CHECK(analytic_gamma_exponential(1.0, 2.0, 0.0).value() == Approx(0.0).margin(1e-14));
    CHECK(analytic_gamma_exponential(1.0, 2.0, 1.0).value() == Approx(1.0).margin(1e-13));
    CHECK(analytic_gamma_exponential(2.0, 4.0, 0.5).value() ==
          Approx(2.0 * 4.0 * 0.5 / (1.0 + 1.0)).margin(1e-13));

    // consistency with -2 Re(dG~/G~) from the closed-form series
    const TimeGrid grid(1.0, 1000);
    const auto series = analytic_exponential(1.0, 8.0, grid);
    const Complex ratio = series.dg_tilde[500] / series.g_tilde[500];
    CHECK(analytic_gamma_exponential(1.0, 8.0, 0.5).value() ==
          Approx(-2.0 * ratio.real()).margin(1e-10));

    // large-argument stability
    CHECK(std::isfinite(analytic_gamma_exponential(1.0, 1000.0, 50.0).value()));

    // pole of the oscillatory regime is reported as masked
    // chi = i for gamma0 = Gamma: gamma(t) = 2 sin(t/2)/(cos(t/2) + sin(t/2)),
    // pole where tan(t/2) = -1, i.e. t = 3 pi/2.
    const auto at_pole = analytic_gamma_exponential(1.0, 1.0, 1.5 * M_PI);
    CHECK_FALSE(at_pole.has_value());
}

TEST_CASE("qubit state validation", "[tcl]") {
    CHECK_NOTHROW(QubitState::excited());
    CHECK_NOTHROW(QubitState::from_elements(0.5, Complex(0.5, 0.0)));
    CHECK_THROWS_AS(QubitState::from_elements(0.5, Complex(0.6, 0.0)),
                    std::invalid_argument); // negative eigenvalue
    CHECK_THROWS_AS(QubitState::from_elements(1.5, Complex(0.0)), std::invalid_argument);
    CHECK(QubitState::excited().min_eigenvalue() == Approx(0.0).margin(1e-15));
}

TEST_CASE("exact map basics", "[tcl]") {
    // identity propagator
    PropagatorSeries identity;
    identity.grid = TimeGrid(1.0, 2);
    identity.g_tilde = {Complex(1.0), Complex(1.0), Complex(1.0)};
    identity.dg_tilde = {Complex(0.0), Complex(0.0), Complex(0.0)};
    const auto rho0 = QubitState::from_elements(0.3, Complex(0.2, 0.1));
    for (const auto& s : evolve_exact(rho0, identity)) {
        CHECK(std::abs(s.rho11() - rho0.rho11()) < 1e-15);
        CHECK(std::abs(s.rho10() - rho0.rho10()) < 1e-15);
    }

    // excited-state population follows |G~|^2 = (2/e)^2
    const TimeGrid grid(2.0, 2000);
    const auto series = analytic_exponential(1.0, 2.0, grid);
    const auto states = evolve_exact(QubitState::excited(), series);
    CHECK(states[1000].rho11().real() == Approx(4.0 / std::exp(2.0)).margin(1e-12));

    // G = i rotates the coherence of |+><+| without touching populations
    PropagatorSeries rotator;
    rotator.grid = TimeGrid(1.0, 2);
    rotator.g_tilde = {Complex(1.0), Complex(0.0, 1.0), Complex(-1.0)};
    rotator.dg_tilde = {Complex(0.0), Complex(0.0), Complex(0.0)};
    const auto plus = QubitState::from_elements(0.5, Complex(0.5, 0.0));
    const auto rotated = evolve_exact(plus, rotator);
    CHECK(std::abs(rotated[1].rho10() - Complex(0.0, 0.5)) < 1e-15);
    CHECK(rotated[1].rho11().real() == Approx(0.5));
}

TEST_CASE("direct integration with zero coefficients is the identity", "[tcl]") {
    TclCoefficients coeffs;
    coeffs.grid = TimeGrid(1.0, 100);
    coeffs.shift.assign(101, 0.0);
    coeffs.rate.assign(101, 0.0);
    coeffs.valid.assign(101, 1);
    const auto rho0 = QubitState::from_elements(0.4, Complex(0.1, -0.2));
    const auto evo = evolve_tcl_direct(rho0, coeffs, coeffs.grid);
    REQUIRE(evo.complete);
    for (const auto& s : evo.states) {
        CHECK(std::abs(s.rho11() - rho0.rho11()) < 1e-14);
        CHECK(std::abs(s.rho10() - rho0.rho10()) < 1e-14);
    }
}

TEST_CASE("direct integration reproduces constant-rate decay", "[tcl]") {
    const TimeGrid grid(5.0, 5000);
    TclCoefficients coeffs;
    coeffs.grid = grid;
    coeffs.shift.assign(grid.n_nodes(), 0.0);
    coeffs.rate.assign(grid.n_nodes(), 1.0);
    coeffs.valid.assign(grid.n_nodes(), 1);
    const auto evo = evolve_tcl_direct(QubitState::excited(), coeffs, grid);
    REQUIRE(evo.complete);
    for (std::size_t k = 0; k < grid.n_nodes(); ++k)
        CHECK(evo.states[k].rho11().real() ==
              Approx(std::exp(-grid.node(k))).margin(1e-9));
}

TEST_CASE("map and equation agree for all kernel families", "[tcl]") {
    const auto rho0 = QubitState::from_elements(0.7, Complex(0.3, -0.25));
    struct Case {
        PropagatorSeries series;
        const char* label;
    };
    const TimeGrid grid(5.0, 5000);
    std::vector<Case> cases;
    cases.push_back({analytic_exponential(1.0, 2.0, grid), "exponential gamma0=2"});
    cases.push_back({analytic_exponential(1.0, 8.0, grid), "exponential gamma0=8"});
    cases.push_back({analytic_box(0.7, 1.0, 4, grid), "box"});
    cases.push_back({solve_volterra(KernelSpec(GaussianBathKernel{2.0, 4, 0.5}),
                                    TimeGrid(5.0, 25000)),
                     "gaussian (volterra)"});

    for (const auto& c : cases) {
        INFO(c.label);
        const auto coeffs = coefficients(c.series);
        const auto map_states = evolve_exact(rho0, c.series);
        const auto ode = evolve_tcl_direct(rho0, coeffs, c.series.grid);
        REQUIRE(!ode.states.empty());
        double max_diff = 0.0;
        for (std::size_t k = 0; k < ode.states.size(); ++k) {
            for (int i = 0; i < 4; ++i)
                max_diff = std::max(max_diff,
                                    std::abs(ode.states[k].m[i] - map_states[k].m[i]));
            CHECK(std::abs(ode.states[k].trace() - 1.0) <= 1e-10);
            CHECK(ode.states[k].hermiticity_error() <= 1e-10);
            CHECK(ode.states[k].min_eigenvalue() >= -1e-9);
        }
        CHECK(max_diff <= 1e-6);
    }
}

TEST_CASE("direct integration truncates at masked nodes", "[tcl]") {
    PropagatorSeries series;
    series.grid = TimeGrid(3.0, 3);
    series.g_tilde = {Complex(1.0), Complex(0.5), Complex(0.0), Complex(0.3)};
    series.dg_tilde = {Complex(0.0), Complex(-0.5), Complex(0.0), Complex(0.0)};
    const auto coeffs = coefficients(series);
    const auto evo = evolve_tcl_direct(QubitState::excited(), coeffs, series.grid);
    CHECK_FALSE(evo.complete);
    CHECK(evo.states.size() == 2);
}

TEST_CASE("coherence magnitude factorizes through |G~|", "[tcl]") {
    const TimeGrid grid(5.0, 2000);
    const auto series = analytic_exponential(1.0, 1.0, grid);
    const auto f = fidelity(series);
    const auto rho0 = QubitState::from_elements(0.5, Complex(0.5, 0.0));
    const auto states = evolve_exact(rho0, series);
    for (std::size_t k = 0; k < states.size(); ++k)
        CHECK(std::abs(states[k].rho10()) / 0.5 == Approx(f[k]).margin(1e-12));
}

TEST_CASE("state fidelity", "[tcl]") {
    const auto plus = QubitState::from_elements(0.5, Complex(0.5, 0.0));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(state_fidelity(Complex(inv_sqrt2), Complex(inv_sqrt2), plus) ==
          Approx(1.0).margin(1e-12));

    // psi0 = |1>: F equals |G~| = 2/e at Gamma t = 1
    const TimeGrid grid(2.0, 2000);
    const auto series = analytic_exponential(1.0, 2.0, grid);
    const auto states = evolve_exact(QubitState::excited(), series);
    const auto f = fidelity(series);
    for (std::size_t k = 0; k < states.size(); k += 100)
        CHECK(state_fidelity(Complex(1.0), Complex(0.0), states[k]) ==
              Approx(f[k]).margin(1e-10));
    CHECK(state_fidelity(Complex(1.0), Complex(0.0), states[1000]) ==
          Approx(2.0 / std::exp(1.0)).margin(1e-10));

    // psi0 = |0>: F = sqrt(1 - rho11)
    const auto mixed = QubitState::from_elements(0.3, Complex(0.1, 0.2));
    CHECK(state_fidelity(Complex(0.0), Complex(1.0), mixed) ==
          Approx(std::sqrt(0.7)).margin(1e-12));

    CHECK_THROWS_AS(state_fidelity(Complex(1.0), Complex(0.5), mixed),
                    std::invalid_argument);
}
