#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfg/assumptions.hpp"
#include "mfg/io.hpp"
#include "mfg/nplayer.hpp"
#include "mfg/paths.hpp"
#include "mfg/scenarios.hpp"
#include "mfg/spec.hpp"
#include "mfg/verify.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

struct CommonOpts {
    std::string scenario;
    std::string config;
    double dt = 0.0;   // 0 = scenario default
    double dnu = 0.0;  // 0 = scenario default
    std::size_t particles = 0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t threads = 1;
    std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_scenario) {
    auto* s = cmd->add_option("--scenario", o.scenario, "named scenario");
    auto* c = cmd->add_option("--config", o.config, "JSON spec file");
    if (needs_scenario) {
        s->excludes(c);
        c->excludes(s);
    }
    cmd->add_option("--dt", o.dt, "time step");
    cmd->add_option("--dnu", o.dnu, "space step for the decoupling field");
    cmd->add_option("--particles", o.particles, "particles per common path");
    cmd->add_option("--paths", o.paths, "number of common paths");
    cmd->add_option("--seed", o.seed, "base seed")->each([&o](const std::string&) { o.seed_set = true; });
    cmd->add_option("--threads", o.threads, "worker cap");
    cmd->add_option("--out-dir", o.out_dir, "artifact directory");
}

mfg::Scenario resolve_scenario(const CommonOpts& o) {
    mfg::Scenario sc;
    if (!o.config.empty()) {
        std::ifstream f(o.config);
        if (!f) throw std::runtime_error("cannot read config: " + o.config);
        std::stringstream ss;
        ss << f.rdbuf();
        mfg::TimeGrid grid(1.0, 1000);
        auto spec = mfg::load_spec(ss.str(), grid);
        if (!std::holds_alternative<mfg::LQSpec>(spec))
            throw std::runtime_error("config must describe an lq spec for this command");
        sc.name = std::filesystem::path(o.config).stem().string();
        sc.lq = std::get<mfg::LQSpec>(spec);
    } else {
        sc = mfg::make_scenario(o.scenario.empty() ? "tanh-crowd" : o.scenario);
    }
    if (o.dt > 0.0) sc.dt = o.dt;
    if (o.dnu > 0.0) sc.sim.dnu = o.dnu;
    if (o.particles > 0) sc.sim.particles = o.particles;
    if (o.paths > 0) sc.sim.n_paths = o.paths;
    if (o.seed_set) sc.sim.seed = o.seed;
    return sc;
}

std::map<std::string, std::string> meta_for(const mfg::Scenario& sc, const mfg::TimeGrid& grid,
                                            std::size_t J) {
    return {{"scenario", sc.name},
            {"seed", std::to_string(sc.sim.seed)},
            {"grid", std::to_string(grid.M) + "x" + std::to_string(J)},
            {"version", kVersion}};
}

int run_check(const CommonOpts& o) {
    const mfg::Scenario sc = resolve_scenario(o);
    mfg::SampleBounds bounds;
    auto samples = mfg::sample_domain(bounds, 10000, sc.sim.seed);
    const mfg::CheckReport rep = mfg::check_lq(sc.lq, samples);
    std::cout << rep.table();
    if (!rep.all_pass()) {
        for (const auto& c : rep.conditions)
            if (!c.pass) std::cout << "violated: " << c.name << "\n";
        return 1;
    }
    return 0;
}

int run_solve(const CommonOpts& o) {
    const mfg::Scenario sc = resolve_scenario(o);
    const mfg::SolvedScenario ss = mfg::solve_scenario(sc);
    std::filesystem::create_directories(o.out_dir);

    {
        std::ostringstream os;
        mfg::CsvWriter w(os);
        w.comment(meta_for(sc, ss.grid, ss.sgrid.J));
        w.row({"t", "P"});
        for (std::size_t k = 0; k <= ss.grid.M; ++k)
            w.row({mfg::csv_field(ss.grid.node(k)), mfg::csv_field(ss.P.at_node(k)[0])});
        mfg::write_text_file(o.out_dir + "/riccati.csv", os.str());
    }
    {
        std::ostringstream os;
        mfg::CsvWriter w(os);
        w.comment(meta_for(sc, ss.grid, ss.sgrid.J));
        w.row({"t", "nu", "phi"});
        for (std::size_t k : {std::size_t{0}, ss.grid.M})
            for (std::size_t j = 0; j <= ss.sgrid.J; ++j)
                w.row({mfg::csv_field(ss.grid.node(k)), mfg::csv_field(ss.sgrid.node(j)),
                       mfg::csv_field(ss.Phi.at(k, j)[0])});
        mfg::write_text_file(o.out_dir + "/phi.csv", os.str());
    }
    std::cout << "riccati sup-norm " << ss.P.sup_norm() << ", bound " << ss.P.bound_certificate()
              << "\nwrote " << o.out_dir << "/riccati.csv, " << o.out_dir << "/phi.csv\n";
    return 0;
}

int run_simulate(const CommonOpts& o) {
    const mfg::Scenario sc = resolve_scenario(o);
    const mfg::SolvedScenario ss = mfg::solve_scenario(sc);
    std::filesystem::create_directories(o.out_dir);

    std::ostringstream stats, paths0;
    mfg::CsvWriter ws(stats), wp(paths0);
    ws.comment(meta_for(sc, ss.grid, ss.sgrid.J));
    ws.row({"path", "max_rel_dev_X", "max_rel_dev_Y", "bsde_residual_rms", "boundary_events",
            "flagged"});
    bool any_flagged = false;
    for (std::size_t p = 0; p < sc.sim.n_paths; ++p) {
        mfg::NoiseDraw nd = mfg::NoiseDraw::common(ss.grid, sc.lq.d, sc.sim.seed + p);
        mfg::NuPath np = mfg::simulate_nu(ss.red.gs, ss.P, ss.Phi, nd, sc.xi_mean);
        any_flagged = any_flagged || np.flagged;
        mfg::ParticleConfig pc;
        pc.particles = sc.sim.particles;
        pc.xi_mean = sc.xi_mean;
        pc.xi_std = sc.xi_std;
        pc.idio_seed = sc.sim.seed + p;
        mfg::PathBundle pb = mfg::simulate_particles(ss.red.gs, ss.P, ss.Phi, np, nd, pc);
        mfg::MomentDeviation md = mfg::estimate_conditional_moments(pb, ss.P, ss.Phi);
        ws.row({std::to_string(p), mfg::csv_field(md.max_rel_dev_X),
                mfg::csv_field(md.max_rel_dev_Y), mfg::csv_field(pb.bsde_residual_rms),
                std::to_string(np.boundary_events), np.flagged ? "1" : "0"});
        if (p == 0) {
            mfg::LqEquilibrium eq = mfg::lq_equilibrium_inputs(ss.red, ss.P, ss.Phi, pb.nu);
            wp.comment(meta_for(sc, ss.grid, ss.sgrid.J));
            wp.row({"t", "nu", "mu", "mean_X", "mean_Y"});
            for (std::size_t k = 0; k <= ss.grid.M; ++k)
                wp.row({mfg::csv_field(ss.grid.node(k)), mfg::csv_field(pb.nu[k]),
                        mfg::csv_field(eq.mu[k]), mfg::csv_field(pb.mean_X[k]),
                        mfg::csv_field(pb.mean_Y[k][0])});
        }
    }
    mfg::write_text_file(o.out_dir + "/consistency.csv", stats.str());
    mfg::write_text_file(o.out_dir + "/paths.csv", paths0.str());
    std::cout << "wrote " << o.out_dir << "/consistency.csv, " << o.out_dir << "/paths.csv\n";
    if (any_flagged) std::cout << "warning: boundary exit rate above 1%; enlarge the nu domain\n";
    return 0;
}

// Scenario-level verification: standing assumptions, Riccati sign and bound,
// terminal slice, master-equation residual on a coarse interior lattice.
int run_verify_scenario(const CommonOpts& o) {
    const mfg::Scenario sc = resolve_scenario(o);
    bool ok = true;

    mfg::SampleBounds bounds;
    auto samples = mfg::sample_domain(bounds, 10000, sc.sim.seed);
    const mfg::CheckReport rep = mfg::check_lq(sc.lq, samples);
    std::cout << rep.table();
    ok = ok && rep.all_pass();
    if (!rep.all_pass())
        for (const auto& c : rep.conditions)
            if (!c.pass) std::cout << "violated: " << c.name << "\n";

    if (ok) {
        const double dt = sc.dt > 2e-3 ? sc.dt : 2e-3;
        const double dnu = sc.sim.dnu > 2e-2 ? sc.sim.dnu : 2e-2;
        const mfg::SolvedScenario ss = mfg::solve_scenario(sc, dt, dnu);
        double pmin = ss.P.at_node(0)[0];
        for (std::size_t k = 0; k <= ss.grid.M; ++k)
            pmin = std::min(pmin, ss.P.at_node(k)[0]);
        const bool riccati_ok = pmin >= -1e-12 && ss.P.sup_norm() <= ss.P.bound_certificate();
        std::cout << "riccati sign/bound: " << (riccati_ok ? "PASS" : "FAIL") << "\n";
        ok = ok && riccati_ok;

        bool terminal_ok = true;
        for (std::size_t j = 0; j <= ss.sgrid.J; ++j)
            terminal_ok = terminal_ok &&
                          ss.Phi.at(ss.grid.M, j)[0] == ss.red.gs.h2(ss.sgrid.node(j))[0];
        std::cout << "terminal slice exact: " << (terminal_ok ? "PASS" : "FAIL") << "\n";
        ok = ok && terminal_ok;

        mfg::MasterField mf{&ss.P, &ss.Phi};
        double max_res = 0.0;
        for (std::size_t k : {ss.grid.M / 4, ss.grid.M / 2, 3 * ss.grid.M / 4})
            for (double x : {-1.0, 0.0, 1.0})
                for (double nu : {-1.0, 0.0, 1.0}) {
                    const auto j = static_cast<std::size_t>(
                        std::llround((nu - ss.sgrid.nu_min) / ss.sgrid.dnu()));
                    max_res = std::max(
                        max_res, mfg::norm_inf(mfg::master_residual(mf, ss.red.gs, k, x, j).total));
                }
        const bool res_ok = max_res <= 5e-2;
        std::cout << "master residual " << max_res << ": " << (res_ok ? "PASS" : "FAIL") << "\n";
        ok = ok && res_ok;
    }
    return ok ? 0 : 1;
}

int run_verify(const CommonOpts& o) {
    if (!o.scenario.empty() || !o.config.empty()) return run_verify_scenario(o);
    const auto results = mfg::run_acceptance();
    bool ok = true;
    for (const auto& r : results) {
        std::cout << "criterion " << r.id << " [" << (r.pass ? "PASS" : "FAIL") << "] " << r.name
                  << ": " << r.detail << "\n";
        ok = ok && r.pass;
    }
    if (!ok) {
        std::cout << "failing:";
        for (const auto& r : results)
            if (!r.pass) std::cout << " " << r.id;
        std::cout << "\n";
    }
    return ok ? 0 : 1;
}

int run_nplayer(const CommonOpts& o) {
    const mfg::Scenario sc = resolve_scenario(o);
    const mfg::SolvedScenario ss = mfg::solve_scenario(sc, std::max(sc.dt, 2e-3), std::max(sc.sim.dnu, 2e-2));
    std::filesystem::create_directories(o.out_dir);
    std::ostringstream os;
    mfg::CsvWriter w(os);
    w.comment(meta_for(sc, ss.grid, ss.sgrid.J));
    w.row({"N", "trial", "gap", "se"});
    for (std::size_t N : {5u, 10u, 50u}) {
        mfg::NPlayerConfig nc;
        nc.N = N;
        nc.trials = 20;
        nc.seed = sc.sim.seed;
        nc.xi_mean = sc.xi_mean;
        nc.xi_std = sc.xi_std;
        const mfg::ExploitabilityResult er = mfg::estimate_exploitability(ss.red, ss.P, ss.Phi, nc);
        for (std::size_t t = 0; t < er.gaps.size(); ++t)
            w.row({std::to_string(N), std::to_string(t), mfg::csv_field(er.gaps[t]),
                   mfg::csv_field(er.gap_se)});
        std::cout << "N=" << N << " mean gap " << er.gap_mean << " (se " << er.gap_se << ")\n";
    }
    mfg::write_text_file(o.out_dir + "/gaps.csv", os.str());
    std::cout << "wrote " << o.out_dir << "/gaps.csv\n";
    return 0;
}

int run_report(const CommonOpts& o) {
    const mfg::Scenario sc = resolve_scenario(o);
    const mfg::SolvedScenario ss = mfg::solve_scenario(sc);
    std::filesystem::create_directories(o.out_dir);

    mfg::SampleBounds bounds;
    const mfg::CheckReport rep = mfg::check_lq(sc.lq, mfg::sample_domain(bounds, 10000, sc.sim.seed));

    mfg::NoiseDraw nd = mfg::NoiseDraw::common(ss.grid, sc.lq.d, sc.sim.seed);
    mfg::NuPath np = mfg::simulate_nu(ss.red.gs, ss.P, ss.Phi, nd, sc.xi_mean);
    mfg::ParticleConfig pc;
    pc.particles = std::min<std::size_t>(sc.sim.particles, 2000);
    pc.xi_mean = sc.xi_mean;
    pc.xi_std = sc.xi_std;
    pc.idio_seed = sc.sim.seed;
    mfg::PathBundle pb = mfg::simulate_particles(ss.red.gs, ss.P, ss.Phi, np, nd, pc);
    mfg::MomentDeviation md = mfg::estimate_conditional_moments(pb, ss.P, ss.Phi);

    mfg::json j;
    j["scenario"] = sc.name;
    j["seed"] = sc.sim.seed;
    j["grid"] = {{"dt", ss.grid.dt()}, {"dnu", ss.sgrid.dnu()}, {"T", ss.grid.T}};
    j["spec"] = mfg::lq_to_json(sc.lq);
    j["assumptions"] = rep.to_json();
    j["riccati"] = {{"sup_norm", ss.P.sup_norm()}, {"bound_certificate", ss.P.bound_certificate()}};
    j["consistency"] = {{"max_rel_dev_X", md.max_rel_dev_X},
                        {"max_rel_dev_Y", md.max_rel_dev_Y},
                        {"bsde_residual_rms", pb.bsde_residual_rms},
                        {"boundary_events", np.boundary_events}};
    j["version"] = kVersion;
    mfg::write_json_file(o.out_dir + "/report.json", j);
    std::cout << "wrote " << o.out_dir << "/report.json\n";
    return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"linear-quadratic extended mean field game solver"};
    app.require_subcommand(1);

    CommonOpts o;
    auto* check = app.add_subcommand("check", "validate standing assumptions");
    auto* solve = app.add_subcommand("solve", "solve the Riccati and decoupling-field equations");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo particle simulation");
    auto* verify = app.add_subcommand("verify", "acceptance suite (or scenario-level checks)");
    auto* nplayer = app.add_subcommand("nplayer", "finite-player gap study");
    auto* report = app.add_subcommand("report", "consolidated JSON report");
    for (auto* cmd : {check, solve, simulate, verify, nplayer, report}) add_common(cmd, o, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (check->parsed()) return run_check(o);
        if (solve->parsed()) return run_solve(o);
        if (simulate->parsed()) return run_simulate(o);
        if (verify->parsed()) return run_verify(o);
        if (nplayer->parsed()) return run_nplayer(o);
        if (report->parsed()) return run_report(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
