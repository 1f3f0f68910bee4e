#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mfg/riccati.hpp"
#include "mfg/scenarios.hpp"
#include "mfg/verify.hpp"

using namespace mfg;

TEST_CASE("linear closed form is reproduced") {
    const double a = 0.5, q = 1.0, g0 = 1.0, T = 1.0;
    GeneralSpec gs = detail::riccati_test_spec(a, 0.0, q, a, g0, 2.0);
    TimeGrid grid(T, 1000);
    RiccatiSolution P = solve_riccati(gs, grid);
    double err = 0.0;
    for (std::size_t k = 0; k <= grid.M; ++k) {
        const double t = grid.node(k);
        const double exact = (g0 + q / (2 * a)) * std::exp(2 * a * (T - t)) - q / (2 * a);
        err = std::max(err, std::abs(P.at_node(k)[0] - exact));
    }
    CHECK(err <= 1e-8);
    CHECK(P.componentwise_nonnegative());
    CHECK(P.sup_norm() <= P.bound_certificate());
}

TEST_CASE("logistic closed form is reproduced") {
    GeneralSpec gs = detail::riccati_test_spec(0.0, -1.0, 1.0, 0.0, 0.5, 2.0);
    TimeGrid grid(1.0, 1000);
    RiccatiSolution P = solve_riccati(gs, grid);
    double err = 0.0;
    for (std::size_t k = 0; k <= grid.M; ++k) {
        const double exact = std::tanh(1.0 - grid.node(k) + std::atanh(0.5));
        err = std::max(err, std::abs(P.at_node(k)[0] - exact));
    }
    CHECK(err <= 1e-8);
}

TEST_CASE("interpolation between nodes stays high order") {
    GeneralSpec gs = detail::riccati_test_spec(0.0, -1.0, 1.0, 0.0, 0.5, 2.0);
    TimeGrid grid(1.0, 100);
    RiccatiSolution P = solve_riccati(gs, grid);
    double err = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double t = i / 1000.0;
        const double exact = std::tanh(1.0 - t + std::atanh(0.5));
        err = std::max(err, std::abs(P.eval(t)[0] - exact));
    }
    CHECK(err <= 1e-7);
}

TEST_CASE("derivative accessor matches the finite difference of eval") {
    GeneralSpec gs = detail::riccati_test_spec(0.3, -0.5, 0.8, 0.2, 1.0, 2.0);
    TimeGrid grid(1.0, 500);
    RiccatiSolution P = solve_riccati(gs, grid);
    for (double t : {0.1, 0.45, 0.9}) {
        const double fd = (P.eval(t + 1e-6)[0] - P.eval(t - 1e-6)[0]) / 2e-6;
        CHECK(P.deriv(t)[0] == Catch::Approx(fd).margin(1e-6));
    }
}

TEST_CASE("gallery riccati solutions are nonnegative and bounded") {
    for (const auto& sc : gallery()) {
        INFO(sc.name);
        LqReduction red = lq_to_general(sc.lq);
        TimeGrid grid(sc.T, 1000);
        RiccatiSolution P = solve_riccati(red.gs, grid);
        CHECK(P.componentwise_nonnegative());
        CHECK(P.sup_norm() <= P.bound_certificate());
    }
}

TEST_CASE("blow-up guard trips on super-linear growth past the certificate") {
    // Declared bound K far below the actual coefficient size makes the guard
    // tight; the quadratic growth then crosses it inside the horizon.
    GeneralSpec gs = detail::riccati_test_spec(0.0, 50.0, 50.0, 0.0, 1.0, 0.1);
    TimeGrid grid(1.0, 1000);
    CHECK_THROWS_AS(solve_riccati(gs, grid), RiccatiError);
}

TEST_CASE("crowd scenario stays inside the hand-computed window") {
    // For these coefficients the backward equation is P' = P^2 - P - 0.75
    // with P(T) = 1, which decreases from 1.5 toward 1 as t falls.
    LqReduction red = lq_to_general(make_scenario("tanh-crowd").lq);
    TimeGrid grid(1.0, 1000);
    RiccatiSolution P = solve_riccati(red.gs, grid);
    for (std::size_t k = 0; k <= grid.M; ++k) {
        CHECK(P.at_node(k)[0] >= 1.0 - 1e-9);
        CHECK(P.at_node(k)[0] <= 1.5 + 1e-9);
    }
    CHECK(P.at_node(grid.M)[0] == 1.0);
}
