#include <doctest.h>

#include <cmath>
#include <random>

#include "hslab/orbits.hpp"
#include "hslab/pohozaev.hpp"

using namespace hslab;

static const Params kCanon{3, 1.0, 1.0, 4.5, std::nullopt};

TEST_CASE("level roots of the quartic potential") {
    auto [a, b] = level_roots(kCanon, 0.02);
    CHECK(a == doctest::Approx(std::sqrt(0.1)).epsilon(1e-12));
    CHECK(b == doctest::Approx(std::sqrt(0.4)).epsilon(1e-12));
    auto [am, bm] = level_roots(kCanon, 0.03125);
    CHECK(am == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(bm == doctest::Approx(0.5).epsilon(1e-12));
    // sigma -> 0+: the outer root tends to the positive zero of F0
    auto [a0, b0] = level_roots(kCanon, 1e-10);
    CHECK(b0 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-4));
    CHECK(a0 < 1e-4);
    CHECK_THROWS_AS(level_roots(kCanon, 0.0), validation_error);
    CHECK_THROWS_AS(level_roots(kCanon, 0.04), validation_error);
}

TEST_CASE("half period: quadrature vs direct ODE measurement") {
    const double ts = half_period(kCanon, 0.02);
    CHECK(ts == doctest::Approx(4.822115582351078).epsilon(1e-9));
    CHECK(std::abs(2.0 * ts - period_ode(kCanon, 0.02)) < 1e-6);
    // harmonic limit at the potential maximum: 2 t_sigma -> 2 pi / sqrt(|f'(M0)|)
    const double P = 2.0 * half_period(kCanon, 0.03125 - 1e-6);
    CHECK(std::abs(P - 2.0 * M_PI * std::sqrt(2.0)) < 1e-3);
    // midway level is finite and positive
    const double tm = half_period(kCanon, 0.015);
    CHECK(tm > 0.0);
    CHECK(tm < 100.0);
    CHECK_THROWS_AS(half_period(kCanon, 0.03125), validation_error);
}

TEST_CASE("orbit evaluation: initial data, periodicity, energy") {
    OrbitSpec spec{0.02, 0.0};
    auto od = get_orbit(kCanon, 0.02);
    auto [phi0, dphi0] = orbit_eval(kCanon, spec, 0.0);
    CHECK(phi0 == doctest::Approx(od->a_sigma).epsilon(1e-12));
    CHECK(std::abs(dphi0) < 1e-12);
    // periodicity after seven periods
    auto [phi7, dphi7] = orbit_eval(kCanon, spec, 7.0 * 2.0 * od->t_sigma);
    CHECK(std::abs(phi7 - od->a_sigma) < 1e-8);
    CHECK(std::abs(dphi7) < 1e-8);
    // conserved energy at random times
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(0.0, 4.0 * od->t_sigma);
    for (int i = 0; i < 100; ++i) {
        auto [phi, dphi] = orbit_eval(kCanon, spec, ut(rng));
        CHECK(std::abs(orbit_sigma(kCanon, phi, dphi) - 0.02) < 1e-9);
    }
    // tau shifts the time origin
    OrbitSpec sh{0.02, M_PI};
    auto [phis, dphis] = orbit_eval(kCanon, sh, od->t_sigma);
    CHECK(phis == doctest::Approx(od->a_sigma).epsilon(1e-10));
    CHECK_THROWS_AS(get_orbit(kCanon, 0.05), validation_error);
}

TEST_CASE("constant orbit at the top level") {
    auto od = get_orbit(kCanon, 0.03125);
    CHECK(od->constant);
    OrbitPoint pt = od->eval_local(1.234);
    CHECK(pt.phi == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(pt.dphi == 0.0);
}

TEST_CASE("sigma derivative: initial value, identity, secular unwrapping") {
    OrbitSpec spec{0.02, 0.0};
    auto od = get_orbit(kCanon, 0.02);
    auto [ds0, dds0] = orbit_sigma_derivative(kCanon, spec, 0.0);
    // d_sigma phi(0) = 1/F0'(a_sigma)
    CHECK(ds0 == doctest::Approx(1.0 / (2.0 * potential_f(kCanon, od->a_sigma))).epsilon(1e-10));
    CHECK(std::abs(dds0) < 1e-10);
    // Wronskian-type identity f(phi) d_sigma phi - phi' d_sigma phi' = 1/2,
    // also across several wrapped periods (secular term handled)
    for (int i = 0; i <= 200; ++i) {
        const double t = 5.0 * 2.0 * od->t_sigma * i / 200.0;
        OrbitPoint pt = od->eval_local(t);
        const double w = potential_f(kCanon, pt.phi) * pt.dphi_dsigma - pt.dphi * pt.ddphi_dsigma;
        CHECK(std::abs(w - 0.5) < 1e-7);
    }
    // near the degenerate top level the derivative path is rejected
    CHECK_THROWS_AS(orbit_sigma_derivative(kCanon, {0.03125, 0.0}, 0.0), validation_error);
}

TEST_CASE("sigma derivative agrees with finite differences") {
    const double h = 1e-5;
    auto od0 = get_orbit(kCanon, 0.02);
    auto odm = get_orbit(kCanon, 0.02 - h);
    auto odp = get_orbit(kCanon, 0.02 + h);
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
        const double t = 2.0 * od0->t_sigma * i / 39.0;
        OrbitPoint pm = odm->eval_local(t), pp = odp->eval_local(t), pc = od0->eval_local(t);
        worst = std::max(worst, std::abs((pp.phi - pm.phi) / (2 * h) - pc.dphi_dsigma));
        worst = std::max(worst, std::abs((pp.dphi - pm.dphi) / (2 * h) - pc.ddphi_dsigma));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("period derivative matches finite differences") {
    const double h = 1e-6;
    auto od = get_orbit(kCanon, 0.02);
    const double fd =
        (half_period(kCanon, 0.02 + h) - half_period(kCanon, 0.02 - h)) / h;  // dP/dsigma
    CHECK(od->dP_dsigma == doctest::Approx(fd).epsilon(1e-5));
}
