#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "mfg/oracle.hpp"
#include "mfg/scenarios.hpp"

using namespace mfg;

namespace {

// fixture rows: scenario,t0,eta,phi
std::map<std::pair<std::string, double>, double> load_fixture() {
    std::ifstream f(std::string(FIXTURE_DIR) + "/oracle_phi0.csv");
    REQUIRE(f.good());
    std::map<std::pair<std::string, double>, double> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("scenario", 0) == 0) continue;
        std::stringstream ss(line);
        std::string name, t0, eta, phi;
        std::getline(ss, name, ',');
        std::getline(ss, t0, ',');
        std::getline(ss, eta, ',');
        std::getline(ss, phi, ',');
        out[{name, std::stod(eta)}] = std::stod(phi);
    }
    return out;
}

}  // namespace

TEST_CASE("shooting reproduces the frozen fixture values") {
    const auto fixture = load_fixture();
    for (const auto& sc : degenerate_gallery()) {
        TimeGrid grid(sc.T, 200);
        LqReduction red = lq_to_general(sc.lq);
        RiccatiSolution P = solve_riccati(red.gs, grid);
        for (double eta : {-1.0, 0.0, 1.0}) {
            INFO(sc.name << " eta=" << eta);
            const auto it = fixture.find({sc.name, eta});
            REQUIRE(it != fixture.end());
            const TPBVPSolution shot = shoot_tpbvp(red.gs, P, grid, 0.0, eta);
            CHECK(std::abs(shot.phi_at_start()[0] - it->second) <= 1e-8);
            CHECK(shot.terminal_mismatch <= 1e-10);
        }
    }
}

TEST_CASE("independent integrators agree on the shooting value") {
    const Scenario sc = make_scenario("mixed-degenerate");
    TimeGrid grid(sc.T, 200);
    LqReduction red = lq_to_general(sc.lq);
    RiccatiSolution P = solve_riccati(red.gs, grid);
    for (double eta : {-1.0, 0.5}) {
        const double a = shoot_tpbvp(red.gs, P, grid, 0.0, eta).phi_at_start()[0];
        const double b = shoot_tpbvp_rk45_phi0(red.gs, P, grid, 0.0, eta)[0];
        CHECK(std::abs(a - b) <= 1e-8);
    }
}

TEST_CASE("picard iteration converges to the shooting trajectory") {
    for (const auto& sc : degenerate_gallery()) {
        INFO(sc.name);
        TimeGrid grid(sc.T, 200);
        LqReduction red = lq_to_general(sc.lq);
        RiccatiSolution P = solve_riccati(red.gs, grid);
        const TPBVPSolution shot = shoot_tpbvp(red.gs, P, grid, 0.0, sc.xi_mean);
        const PicardResult pic = picard_map(red.gs, P, grid, sc.xi_mean);
        REQUIRE(pic.converged);
        CHECK_FALSE(pic.update_history.empty());
        double dphi = 0.0, dnu = 0.0;
        for (std::size_t k = 0; k < pic.phi.size(); ++k) {
            dphi = std::max(dphi, std::abs(pic.phi[k][0] - shot.phi[k][0]));
            dnu = std::max(dnu, std::abs(pic.xbar[k] - shot.nu[k]));
        }
        CHECK(dphi <= 1e-6);
        CHECK(dnu <= 1e-6);
    }
}

TEST_CASE("shooting rejects common-noise diffusion") {
    const Scenario sc = make_scenario("tanh-crowd");
    TimeGrid grid(sc.T, 100);
    LqReduction red = lq_to_general(sc.lq);
    RiccatiSolution P = solve_riccati(red.gs, grid);
    CHECK_THROWS_AS(shoot_tpbvp(red.gs, P, grid, 0.0, 0.0), OracleError);
}

TEST_CASE("picard mean trajectory satisfies the decoupling relation") {
    const Scenario sc = make_scenario("sin-drift-degenerate");
    TimeGrid grid(sc.T, 200);
    LqReduction red = lq_to_general(sc.lq);
    RiccatiSolution P = solve_riccati(red.gs, grid);
    const PicardResult pic = picard_map(red.gs, P, grid, sc.xi_mean);
    REQUIRE(pic.converged);
    for (std::size_t k = 0; k < pic.times.size(); k += 100) {
        const double p = P.eval(pic.times[k])[0];
        CHECK(pic.ybar[k][0] ==
              Catch::Approx(p * pic.xbar[k] + pic.phi[k][0]).margin(1e-8));
    }
}
