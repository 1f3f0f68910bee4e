#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/coefficients.hpp"
#include "mfg/phi_field.hpp"
#include "mfg/reduction.hpp"
#include "mfg/riccati.hpp"
#include "mfg/spec.hpp"

namespace mfg {

// Named test problem: an LQ game plus the simulation defaults used by the
// command-line tools and the acceptance suite.
struct Scenario {
    std::string name;
    LQSpec lq;
    double T = 1.0;
    double dt = 1e-3;
    SimConfig sim;
    double xi_mean = 0.5;  // initial conditional mean and particle mean
    double xi_std = 0.3;
    bool degenerate = false;  // no common-noise diffusion
};

inline NonlinearMap sin_map(double amp, double omega = 1.0) {
    return NonlinearMap::from_json(json{{"type", "sin"}, {"amp", amp}, {"omega", omega}});
}

inline std::vector<std::string> scenario_names() {
    return {"zero", "tanh-crowd", "tanh-crowd-degenerate", "sin-drift-degenerate",
            "mixed-degenerate", "b3-violation"};
}

inline Scenario make_scenario(const std::string& name) {
    Scenario sc;
    sc.name = name;
    LQSpec& lq = sc.lq;
    lq.d = 1;
    lq.K = 2.0;
    lq.eps0 = 0.5;
    if (name == "zero") {
        // No interaction: every mean-field map vanishes, the game decouples.
        lq.A = ScalarCoefficient::constant(0.5);
        lq.B = ScalarCoefficient::constant(1.0);
        lq.Q = ScalarCoefficient::constant(1.0);
        lq.R = ScalarCoefficient::constant(1.0);
        lq.F = ScalarCoefficient::constant(0.0);
        lq.G = 1.0;
        lq.sigma = Vec{0.2};
        lq.sigma0 = Vec{0.2};
    } else if (name == "tanh-crowd" || name == "tanh-crowd-degenerate") {
        lq.A = ScalarCoefficient::constant(1.0);
        lq.B = ScalarCoefficient::constant(1.0);
        lq.Q = ScalarCoefficient::constant(1.0);
        lq.R = ScalarCoefficient::constant(1.0);
        lq.F = ScalarCoefficient::constant(0.5);
        lq.G = 1.0;
        lq.h = NonlinearMap::tanh_map(0.2);
        lq.b = NonlinearMap::tanh_map(-0.1);
        lq.sigma = Vec{0.2};
        lq.sigma0 = Vec{name == "tanh-crowd" ? 0.2 : 0.0};
        sc.degenerate = (name == "tanh-crowd-degenerate");
    } else if (name == "sin-drift-degenerate") {
        lq.A = ScalarCoefficient::constant(0.3);
        lq.B = ScalarCoefficient::constant(1.0);
        lq.Q = ScalarCoefficient::constant(1.0);
        lq.R = ScalarCoefficient::constant(1.0);
        lq.F = ScalarCoefficient::constant(0.0);
        lq.G = 0.8;
        lq.f = sin_map(0.3);
        lq.l = sin_map(0.2);
        lq.g = NonlinearMap::tanh_map(0.2);
        lq.sigma = Vec{0.1};
        lq.sigma0 = Vec{0.0};
        sc.degenerate = true;
    } else if (name == "mixed-degenerate") {
        lq.A = ScalarCoefficient::constant(-0.2);
        lq.B = ScalarCoefficient::constant(1.0);
        lq.Q = ScalarCoefficient::constant(1.2);
        lq.R = ScalarCoefficient::constant(1.5);
        lq.F = ScalarCoefficient::constant(0.3);
        lq.G = 1.0;
        lq.h = NonlinearMap::tanh_map(0.1);
        lq.b = NonlinearMap::tanh_map(0.15);
        lq.f = sin_map(0.1);
        lq.q = sin_map(0.2);
        lq.sigma = Vec{0.15};
        lq.sigma0 = Vec{0.0};
        sc.degenerate = true;
    } else if (name == "b3-violation") {
        // h' == -1 kills the control-mean consistency margin.
        lq.A = ScalarCoefficient::constant(0.5);
        lq.B = ScalarCoefficient::constant(1.0);
        lq.Q = ScalarCoefficient::constant(1.0);
        lq.R = ScalarCoefficient::constant(1.0);
        lq.F = ScalarCoefficient::constant(0.0);
        lq.G = 1.0;
        lq.h = NonlinearMap::linear(-1.0);
        lq.sigma = Vec{0.2};
        lq.sigma0 = Vec{0.2};
    } else {
        throw std::invalid_argument("unknown scenario: " + name);
    }
    sc.sim.seed = 1234;
    return sc;
}

// Well-posed scenarios used by the acceptance criteria.
inline std::vector<Scenario> gallery() {
    std::vector<Scenario> out;
    for (const auto& n : scenario_names())
        if (n != "b3-violation") out.push_back(make_scenario(n));
    return out;
}

inline std::vector<Scenario> degenerate_gallery() {
    std::vector<Scenario> out;
    for (auto& sc : gallery())
        if (sc.degenerate) out.push_back(sc);
    return out;
}

// Full solve pipeline for one scenario at the given resolution.
struct SolvedScenario {
    Scenario sc;
    TimeGrid grid;
    SpaceGrid sgrid;
    LqReduction red;
    RiccatiSolution P;
    PhiField Phi;
};

inline SolvedScenario solve_scenario(const Scenario& sc, double dt, double dnu) {
    const auto steps = static_cast<std::size_t>(std::llround(sc.T / dt));
    if (steps == 0) throw std::invalid_argument("solve_scenario: dt larger than horizon");
    TimeGrid grid(sc.T, steps);
    const double span = sc.sim.nu_max - sc.sim.nu_min;
    const auto cells = static_cast<std::size_t>(std::llround(span / dnu));
    if (cells < 2) throw std::invalid_argument("solve_scenario: dnu too coarse for the domain");
    SpaceGrid sgrid(sc.sim.nu_min, sc.sim.nu_max, cells);
    LqReduction red = lq_to_general(sc.lq);
    RiccatiSolution P = solve_riccati(red.gs, grid);
    PhiField Phi = solve_phi(red.gs, P, grid, sgrid);
    return SolvedScenario{sc, grid, sgrid, red, std::move(P), std::move(Phi)};
}

inline SolvedScenario solve_scenario(const Scenario& sc) {
    return solve_scenario(sc, sc.dt, sc.sim.dnu);
}

}  // namespace mfg
