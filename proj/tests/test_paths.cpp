#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mfg/paths.hpp"
#include "mfg/scenarios.hpp"

using namespace mfg;

TEST_CASE("noise draws are reproducible and stream-separated") {
    TimeGrid grid(1.0, 100);
    NoiseDraw a = NoiseDraw::common(grid, 1, 7);
    NoiseDraw b = NoiseDraw::common(grid, 1, 7);
    NoiseDraw c = NoiseDraw::common(grid, 1, 8);
    bool same = true, differ = false;
    for (std::size_t k = 0; k < grid.M; ++k) {
        same = same && a.dW0[k][0] == b.dW0[k][0];
        differ = differ || a.dW0[k][0] != c.dW0[k][0];
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("conditional mean path ignores the common draw when degenerate") {
    const Scenario sc = make_scenario("tanh-crowd-degenerate");
    SolvedScenario ss = solve_scenario(sc, 2e-3, 2e-2);
    NoiseDraw a = NoiseDraw::common(ss.grid, 1, 1);
    NoiseDraw b = NoiseDraw::common(ss.grid, 1, 2);
    NuPath pa = simulate_nu(ss.red.gs, ss.P, ss.Phi, a, sc.xi_mean);
    NuPath pb = simulate_nu(ss.red.gs, ss.P, ss.Phi, b, sc.xi_mean);
    for (std::size_t k = 0; k <= ss.grid.M; ++k) CHECK(pa.nu[k] == pb.nu[k]);
    CHECK(pa.boundary_events == 0);
}

TEST_CASE("particle cloud tracks the conditional mean") {
    const Scenario sc = make_scenario("tanh-crowd");
    SolvedScenario ss = solve_scenario(sc, 2e-3, 2e-2);
    NoiseDraw nd = NoiseDraw::common(ss.grid, 1, sc.sim.seed);
    NuPath np = simulate_nu(ss.red.gs, ss.P, ss.Phi, nd, sc.xi_mean);
    ParticleConfig pc;
    pc.particles = 4000;
    pc.xi_mean = sc.xi_mean;
    pc.xi_std = sc.xi_std;
    pc.idio_seed = 1;
    PathBundle pb = simulate_particles(ss.red.gs, ss.P, ss.Phi, np, nd, pc);
    MomentDeviation md = estimate_conditional_moments(pb, ss.P, ss.Phi);
    CHECK(md.max_rel_dev_X < 0.1);
    CHECK(md.max_rel_dev_Y < 0.1);
    CHECK_FALSE(md.low_particle_warning);
    CHECK(pb.bsde_residual_rms < 0.05);

    // Y is built from the decoupling relation, so the cloud means satisfy it
    // at machine precision.
    for (std::size_t k = 0; k <= ss.grid.M; k += 50) {
        const double p = ss.P.at_node(k)[0];
        const double phi = ss.Phi.eval(ss.grid.node(k), pb.nu[k])[0];
        CHECK(pb.mean_Y[k][0] == Catch::Approx(p * pb.mean_X[k] + phi).margin(1e-10));
    }
}

TEST_CASE("few particles raise the low-count warning") {
    const Scenario sc = make_scenario("zero");
    SolvedScenario ss = solve_scenario(sc, 5e-3, 5e-2);
    NoiseDraw nd = NoiseDraw::common(ss.grid, 1, 3);
    NuPath np = simulate_nu(ss.red.gs, ss.P, ss.Phi, nd, sc.xi_mean);
    ParticleConfig pc;
    pc.particles = 50;
    pc.xi_mean = sc.xi_mean;
    PathBundle pb = simulate_particles(ss.red.gs, ss.P, ss.Phi, np, nd, pc);
    CHECK(pb.low_particle_warning);
    CHECK(estimate_conditional_moments(pb, ss.P, ss.Phi).low_particle_warning);
}

TEST_CASE("narrow domains flag boundary reflections") {
    Scenario sc = make_scenario("zero");
    sc.sim.nu_min = 0.3;
    sc.sim.nu_max = 0.7;
    SolvedScenario ss = solve_scenario(sc, 1e-3, 5e-2);
    NoiseDraw nd = NoiseDraw::common(ss.grid, 1, 11);
    NuPath np = simulate_nu(ss.red.gs, ss.P, ss.Phi, nd, sc.xi_mean);
    CHECK(np.boundary_events > 0);
    CHECK(np.flagged);
}

TEST_CASE("equilibrium control mean satisfies the consistency formula") {
    const Scenario sc = make_scenario("tanh-crowd");
    SolvedScenario ss = solve_scenario(sc, 2e-3, 2e-2);
    NoiseDraw nd = NoiseDraw::common(ss.grid, 1, sc.sim.seed);
    NuPath np = simulate_nu(ss.red.gs, ss.P, ss.Phi, nd, sc.xi_mean);
    LqEquilibrium eq = lq_equilibrium_inputs(ss.red, ss.P, ss.Phi, np.nu);
    const LQSpec& lq = sc.lq;
    for (std::size_t k = 0; k <= ss.grid.M; k += 100) {
        const double t = ss.grid.node(k);
        const double ybar = ss.P.at_node(k)[0] * np.nu[k] + ss.Phi.eval(t, np.nu[k])[0];
        const double z = -lq.B(t) / lq.R(t) * ybar - lq.F(t) / lq.R(t) * np.nu[k];
        CHECK(std::abs(eq.mu[k] + lq.h(t, eq.mu[k]) - z) <= 1e-10);
        // the feedback at (x, y) = (nu, ybar) averages to the control mean
        CHECK(eq.alpha(k, np.nu[k], ybar) == Catch::Approx(eq.mu[k]).margin(1e-9));
    }
}

TEST_CASE("cost evaluation is reproducible and punishes perturbations") {
    const Scenario sc = make_scenario("zero");
    SolvedScenario ss = solve_scenario(sc, 2e-3, 2e-2);
    NoiseDraw nd = NoiseDraw::common(ss.grid, 1, sc.sim.seed);
    NuPath np = simulate_nu(ss.red.gs, ss.P, ss.Phi, nd, sc.xi_mean);
    LqEquilibrium eq = lq_equilibrium_inputs(ss.red, ss.P, ss.Phi, np.nu);
    ParticleConfig pc;
    pc.particles = 1000;
    pc.xi_mean = sc.xi_mean;
    pc.xi_std = sc.xi_std;
    pc.idio_seed = 5;
    const CostEstimate a = evaluate_cost(ss.red, ss.P, ss.Phi, eq.alpha, eq.mu, np.nu, nd, pc);
    const CostEstimate b = evaluate_cost(ss.red, ss.P, ss.Phi, eq.alpha, eq.mu, np.nu, nd, pc);
    REQUIRE(a.per_particle.size() == pc.particles);
    CHECK(a.mean == b.mean);
    CHECK(a.se > 0.0);

    auto alpha = eq.alpha;
    auto pert = [alpha](std::size_t k, double x, double y) { return alpha(k, x, y) + 0.2; };
    const CostEstimate p = evaluate_cost(ss.red, ss.P, ss.Phi, pert, eq.mu, np.nu, nd, pc);
    // With common random numbers and an exactly optimal feedback, every
    // pairwise comparison favors the unperturbed control on average.
    CHECK(p.mean > a.mean);
}
