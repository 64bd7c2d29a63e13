#include <doctest.h>

#include <cmath>

#include "hslab/ode.hpp"
#include "hslab/picard.hpp"

using namespace hslab;

TEST_CASE("exponential growth matches closed form") {
    OdeRhs rhs = [](double, const Vec& y, Vec& d) { d = {y[0]}; };
    OdeSolution sol = integrate_ode(rhs, 0.0, 5.0, {1.0});
    CHECK(sol.y.back()[0] == doctest::Approx(std::exp(5.0)).epsilon(1e-9));
    // dense output between nodes
    CHECK(sol.eval(2.345)[0] == doctest::Approx(std::exp(2.345)).epsilon(1e-8));
    CHECK(sol.eval_deriv(2.345)[0] == doctest::Approx(std::exp(2.345)).epsilon(1e-6));
}

TEST_CASE("harmonic oscillator conserves energy") {
    OdeRhs rhs = [](double, const Vec& y, Vec& d) { d = {y[1], -y[0]}; };
    OdeSolution sol = integrate_ode(rhs, 0.0, 50.0, {1.0, 0.0});
    for (std::size_t i = 0; i < sol.t.size(); i += 7) {
        const double E = sol.y[i][0] * sol.y[i][0] + sol.y[i][1] * sol.y[i][1];
        CHECK(E == doctest::Approx(1.0).epsilon(1e-8));
    }
    CHECK(sol.y.back()[0] == doctest::Approx(std::cos(50.0)).epsilon(1e-7));
}

TEST_CASE("event detection locates zero crossings") {
    OdeRhs rhs = [](double, const Vec& y, Vec& d) { d = {y[1], -y[0]}; };
    std::vector<EventSpec> evs{
        {"cross", [](double, const Vec& y) { return y[0]; }, false, 0}};
    OdeSolution sol = integrate_ode(rhs, 0.0, 10.0, {1.0, 0.0}, {}, evs);
    REQUIRE(sol.events.size() == 3);  // pi/2, 3pi/2, 5pi/2
    CHECK(sol.events[0].t == doctest::Approx(M_PI_2).epsilon(1e-8));
    CHECK(sol.events[1].t == doctest::Approx(3.0 * M_PI_2).epsilon(1e-8));
    CHECK_FALSE(sol.terminated_by_event);
}

TEST_CASE("terminal event truncates the solution") {
    OdeRhs rhs = [](double, const Vec& y, Vec& d) { d = {y[1], -y[0]}; };
    std::vector<EventSpec> evs{
        {"stop", [](double, const Vec& y) { return y[0]; }, true, -1}};
    OdeSolution sol = integrate_ode(rhs, 0.0, 10.0, {1.0, 0.0}, {}, evs);
    CHECK(sol.terminated_by_event);
    CHECK(sol.terminal_kind == "stop");
    CHECK(sol.t.back() == doctest::Approx(M_PI_2).epsilon(1e-8));
    CHECK(std::abs(sol.y.back()[0]) < 1e-8);
}

TEST_CASE("event starting exactly at zero is not re-triggered") {
    // y' = 1 from y(0) = 0: the event function starts at 0 and leaves it
    OdeRhs rhs = [](double, const Vec&, Vec& d) { d = {1.0}; };
    std::vector<EventSpec> evs{
        {"zero", [](double, const Vec& y) { return y[0]; }, true, +1}};
    OdeSolution sol = integrate_ode(rhs, 0.0, 1.0, {0.0}, {}, evs);
    CHECK(sol.events.empty());
    CHECK(sol.t.back() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("direction filter on events") {
    OdeRhs rhs = [](double, const Vec& y, Vec& d) { d = {y[1], -y[0]}; };
    std::vector<EventSpec> up{{"up", [](double, const Vec& y) { return y[0]; }, false, +1}};
    OdeSolution sol = integrate_ode(rhs, 0.0, 10.0, {1.0, 0.0}, {}, up);
    REQUIRE(sol.events.size() == 1);  // only the -..+ crossing at 3pi/2
    CHECK(sol.events[0].t == doctest::Approx(3.0 * M_PI_2).epsilon(1e-8));
}

TEST_CASE("invalid spans and budgets are rejected") {
    OdeRhs rhs = [](double, const Vec& y, Vec& d) { d = {y[0]}; };
    CHECK_THROWS_AS(integrate_ode(rhs, 1.0, 1.0, {1.0}), validation_error);
    CHECK_THROWS_AS(integrate_ode(rhs, 1.0, 0.0, {1.0}), validation_error);
    OdeOptions tight;
    tight.max_steps = 3;
    CHECK_THROWS_AS(integrate_ode(rhs, 0.0, 5.0, {1.0}, tight), numeric_error);
}

TEST_CASE("tiny seed coordinates integrate through many scales") {
    // y' = y / t has solution y = c t; start at t0 = 1e-18
    OdeRhs rhs = [](double t, const Vec& y, Vec& d) { d = {y[0] / t}; };
    OdeSolution sol = integrate_ode(rhs, 1e-18, 1.0, {1e-18});
    CHECK(sol.y.back()[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("picard: affine contraction") {
    auto op = [](double x) { return 0.5 * x + 1.0; };
    auto dist = [](double a, double b) { return std::abs(a - b); };
    auto res = picard_iterate(op, 0.0, 1e-12, 100, dist);
    CHECK(res.fixed_point == doctest::Approx(2.0).epsilon(1e-10));
    for (double r : res.ratios) CHECK(r == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("picard: expanding map diverges") {
    auto op = [](double x) { return 2.0 * x + 1.0; };
    auto dist = [](double a, double b) { return std::abs(a - b); };
    CHECK_THROWS_AS(picard_iterate(op, 0.0, 1e-12, 100, dist), numeric_error);
}

TEST_CASE("picard: iteration budget enforced") {
    auto op = [](double x) { return 0.999 * x + 1.0; };
    auto dist = [](double a, double b) { return std::abs(a - b); };
    CHECK_THROWS_AS(picard_iterate(op, 0.0, 1e-12, 5, dist), numeric_error);
}
