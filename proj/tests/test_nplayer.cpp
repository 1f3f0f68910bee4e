#include <catch2/catch_amalgamated.hpp>

#include "mfg/nplayer.hpp"
#include "mfg/scenarios.hpp"

using namespace mfg;

TEST_CASE("single-player games are rejected") {
    const Scenario sc = make_scenario("zero");
    SolvedScenario ss = solve_scenario(sc, 5e-3, 5e-2);
    NPlayerConfig cfg;
    cfg.N = 1;
    CHECK_THROWS_AS(estimate_exploitability(ss.red, ss.P, ss.Phi, cfg), std::invalid_argument);
    cfg.N = 2;
    cfg.trials = 0;
    CHECK_THROWS_AS(estimate_exploitability(ss.red, ss.P, ss.Phi, cfg), std::invalid_argument);
}

TEST_CASE("the gap vanishes exactly without interaction") {
    // With every mean-field map zero the game decouples: the limiting
    // feedback is the exact optimum, and the frozen-crowd response coincides
    // with it path by path.
    const Scenario sc = make_scenario("zero");
    SolvedScenario ss = solve_scenario(sc, 2e-3, 2e-2);
    NPlayerConfig cfg;
    cfg.N = 5;
    cfg.trials = 8;
    cfg.seed = 77;
    cfg.xi_mean = sc.xi_mean;
    cfg.xi_std = sc.xi_std;
    const ExploitabilityResult er = estimate_exploitability(ss.red, ss.P, ss.Phi, cfg);
    for (double g : er.gaps) CHECK(std::abs(g) <= 1e-10);
    CHECK(std::abs(er.gap_mean) <= 1e-10);
}

TEST_CASE("gap estimates are reproducible and near-nonnegative") {
    const Scenario sc = make_scenario("tanh-crowd");
    SolvedScenario ss = solve_scenario(sc, 2e-3, 2e-2);
    NPlayerConfig cfg;
    cfg.N = 5;
    cfg.trials = 10;
    cfg.seed = sc.sim.seed;
    cfg.xi_mean = sc.xi_mean;
    cfg.xi_std = sc.xi_std;
    const ExploitabilityResult a = estimate_exploitability(ss.red, ss.P, ss.Phi, cfg);
    const ExploitabilityResult b = estimate_exploitability(ss.red, ss.P, ss.Phi, cfg);
    CHECK(a.gap_mean == b.gap_mean);
    CHECK(a.gaps.size() == cfg.trials);
    CHECK(a.gap_mean >= -2.0 * a.gap_se);
    CHECK(a.baseline_mean >= a.br_mean - 2.0 * a.gap_se);
}
