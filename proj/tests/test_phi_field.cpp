#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mfg/oracle.hpp"
#include "mfg/phi_field.hpp"
#include "mfg/scenarios.hpp"
#include "mfg/verify.hpp"

using namespace mfg;

TEST_CASE("no-interaction scenario has an identically zero field") {
    const Scenario sc = make_scenario("zero");
    SolvedScenario ss = solve_scenario(sc, 5e-3, 5e-2);
    for (std::size_t k = 0; k <= ss.grid.M; ++k)
        for (std::size_t j = 0; j <= ss.sgrid.J; ++j)
            CHECK(std::abs(ss.Phi.at(k, j)[0]) <= 1e-14);
}

TEST_CASE("space-independent data reduces the pde to an ode") {
    // Constant b0, f0, h2: the field is flat in nu and solves
    // phi' + (b2 phi) P + f2 phi + f0 + P b0 = 0 backward from h2.
    GeneralSpec gs = detail::riccati_test_spec(0.3, -0.2, 0.5, 0.1, 1.0, 2.0);
    gs.b0 = [](double, double, const Vec&) { return 0.4; };
    gs.f0 = [](double, double, const Vec&) { return Vec{-0.3}; };
    gs.h2 = [](double) { return Vec{0.7}; };
    TimeGrid grid(1.0, 1000);
    SpaceGrid sgrid(-5.0, 5.0, 100);
    RiccatiSolution P = solve_riccati(gs, grid);
    PhiField Phi = solve_phi(gs, P, grid, sgrid);

    detail::OdeRhs rhs = [&](double t, const Vec& v) {
        const double p = P.eval(t)[0];
        return Vec{-((-0.2 * v[0]) * p + 0.1 * v[0] - 0.3 + p * 0.4)};
    };
    // Integrate backward from the terminal value, then compare on nodes.
    Vec ref{0.7};
    std::vector<double> ref_at(grid.M + 1);
    ref_at[grid.M] = 0.7;
    const double h = grid.dt();
    for (std::size_t k = grid.M; k-- > 0;) {
        ref = detail::rk4_step(rhs, grid.node(k + 1), ref, -h);
        ref_at[k] = ref[0];
    }
    double err = 0.0;
    for (std::size_t k = 0; k <= grid.M; ++k)
        for (std::size_t j = 0; j <= sgrid.J; ++j)
            err = std::max(err, std::abs(Phi.at(k, j)[0] - ref_at[k]));
    CHECK(err <= 5e-3);
}

TEST_CASE("terminal slice is exact for every gallery scenario") {
    for (const auto& sc : gallery()) {
        INFO(sc.name);
        SolvedScenario ss = solve_scenario(sc, 5e-3, 5e-2);
        for (std::size_t j = 0; j <= ss.sgrid.J; ++j)
            CHECK(ss.Phi.at(ss.grid.M, j)[0] == ss.red.gs.h2(ss.sgrid.node(j))[0]);
    }
}

TEST_CASE("cfl violations abort with a remedial step size") {
    GeneralSpec gs = detail::riccati_test_spec(2000.0, 0.0, 0.5, 0.0, 1.0, 2.0);
    gs.b0 = [](double, double, const Vec&) { return 0.0; };
    gs.f0 = [](double, double, const Vec&) { return Vec{0.0}; };
    gs.h2 = [](double) { return Vec{0.0}; };
    gs.K = 2.0;
    TimeGrid grid(1.0, 100);
    SpaceGrid sgrid(-5.0, 5.0, 200);
    // The riccati guard would trip for K = 2 with b1 = 2000, so feed the pde
    // a benign P from a matching small spec instead.
    GeneralSpec small = detail::riccati_test_spec(0.1, 0.0, 0.5, 0.1, 1.0, 2.0);
    RiccatiSolution P = solve_riccati(small, grid);
    try {
        solve_phi(gs, P, grid, sgrid);
        FAIL("expected CflError");
    } catch (const CflError& e) {
        CHECK(std::string(e.what()).find("dt") != std::string::npos);
    }
}

TEST_CASE("field evaluation interpolates and guards the domain") {
    const Scenario sc = make_scenario("tanh-crowd");
    SolvedScenario ss = solve_scenario(sc, 2e-3, 2e-2);
    const Vec at_node = ss.Phi.at(0, ss.sgrid.J / 2);
    CHECK(ss.Phi.eval(0.0, ss.sgrid.node(ss.sgrid.J / 2))[0] ==
          Catch::Approx(at_node[0]).margin(1e-14));
    CHECK_THROWS_AS(ss.Phi.eval(0.0, 5.5), std::out_of_range);
    MasterField mf{&ss.P, &ss.Phi};
    CHECK_THROWS_AS(mf.eval_U(0.0, 0.0, -6.0), std::out_of_range);
    CHECK(std::isfinite(mf.decoupling_slope_sup()));
}

TEST_CASE("master residual terms in x vanish identically") {
    const Scenario sc = make_scenario("tanh-crowd");
    SolvedScenario ss = solve_scenario(sc, 2e-3, 2e-2);
    MasterField mf{&ss.P, &ss.Phi};
    for (double x : {-3.0, 0.0, 3.0}) {
        const auto terms = master_residual(mf, ss.red.gs, ss.grid.M / 2, x, ss.sgrid.J / 2);
        CHECK(terms.x_second_order[0] == 0.0);
    }
    CHECK_THROWS_AS(master_residual(mf, ss.red.gs, 0, 0.0, ss.sgrid.J / 2), std::out_of_range);
}
