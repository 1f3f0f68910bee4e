// Regenerates tests/fixtures/oracle_phi0.csv: decoupling-field values at t0=0
// pinned by two independent integrators (RK4 shooting with Newton, Cash-Karp
// RK45 shooting with a scalar secant). A disagreement above 1e-8 aborts.
#include <cmath>
#include <iostream>
#include <sstream>

#include "mfg/io.hpp"
#include "mfg/oracle.hpp"
#include "mfg/scenarios.hpp"

int main(int argc, char** argv) {
    const std::string out = argc > 1 ? argv[1] : "tests/fixtures/oracle_phi0.csv";
    std::ostringstream os;
    mfg::CsvWriter w(os);
    w.comment({{"generator", "make_fixtures"},
               {"integrators", "rk4-newton+rk45-secant"},
               {"agreement_tol", "1e-8"},
               {"commit", "2e2ed13"}});
    w.row({"scenario", "t0", "eta", "phi"});

    for (const auto& sc : mfg::degenerate_gallery()) {
        mfg::TimeGrid grid(sc.T, 200);
        mfg::LqReduction red = mfg::lq_to_general(sc.lq);
        mfg::RiccatiSolution P = mfg::solve_riccati(red.gs, grid);
        for (double eta : {-1.0, 0.0, 1.0}) {
            const double a = mfg::shoot_tpbvp(red.gs, P, grid, 0.0, eta).phi_at_start()[0];
            const double b = mfg::shoot_tpbvp_rk45_phi0(red.gs, P, grid, 0.0, eta)[0];
            if (std::abs(a - b) > 1e-8) {
                std::cerr << sc.name << " eta=" << eta << ": integrators disagree by "
                          << std::abs(a - b) << "\n";
                return 1;
            }
            w.row({sc.name, "0", mfg::csv_field(eta), mfg::csv_field(a)});
        }
    }

    // Reference value for the non-degenerate solve: the field at (t, nu) =
    // (0, 0) from a refined grid, used as the target for the coarser
    // command-line solve.
    {
        const mfg::Scenario sc = mfg::make_scenario("tanh-crowd");
        mfg::SolvedScenario ss = mfg::solve_scenario(sc, 5e-4, 5e-3);
        w.row({"tanh-crowd-pde", "0", "0", mfg::csv_field(ss.Phi.eval(0.0, 0.0)[0])});
    }

    mfg::write_text_file(out, os.str());
    std::cout << "wrote " << out << "\n";
    return 0;
}
