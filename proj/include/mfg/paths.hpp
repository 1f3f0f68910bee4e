#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/phi_field.hpp"
#include "mfg/reduction.hpp"
#include "mfg/riccati.hpp"
#include "mfg/rng.hpp"
#include "mfg/spec.hpp"

namespace mfg {

// Brownian increments for one common path. Idiosyncratic increments are
// regenerated per particle from (seed, particle stream) and never stored.
struct NoiseDraw {
    std::size_t d = 1;
    double dt = 0.0;
    std::vector<Vec> dW0;  // [step][component]
    std::uint64_t seed = 0;

    static NoiseDraw common(const TimeGrid& grid, std::size_t d, std::uint64_t seed) {
        NoiseDraw nd;
        nd.d = d;
        nd.dt = grid.dt();
        nd.seed = seed;
        nd.dW0.assign(grid.M, Vec(d));
        Philox rng(seed, 0);  // stream 0 reserved for the common noise
        const double s = std::sqrt(nd.dt);
        for (std::size_t k = 0; k < grid.M; ++k)
            for (std::size_t c = 0; c < d; ++c) nd.dW0[k][c] = s * rng.normal();
        return nd;
    }
};

struct NuPath {
    std::vector<double> nu;  // node values, size M+1
    std::size_t boundary_events = 0;
    bool flagged = false;  // boundary exit rate > 1% of steps
};

// Euler-Maruyama for the conditional-mean forward dynamics under one common
// path, with reflection at the truncated domain boundary.
inline NuPath simulate_nu(const GeneralSpec& gs, const RiccatiSolution& P, const PhiField& Phi,
                          const NoiseDraw& nd, double eta) {
    const TimeGrid& grid = Phi.grid();
    const SpaceGrid& sg = Phi.sgrid();
    NuPath out;
    out.nu.assign(grid.size(), eta);
    double nu = eta;
    for (std::size_t k = 0; k < grid.M; ++k) {
        const double t = grid.node(k);
        const Vec p = P.at_node(k);
        const Vec phi = Phi.eval(t, nu);
        Vec y(gs.n);
        for (std::size_t i = 0; i < gs.n; ++i) y[i] = p[i] * nu + phi[i];
        const double a = detail::nu_drift(gs, t, nu, p, phi, y);
        const Vec diff = detail::nu_diffusion(gs, t, nu, y);
        nu += a * grid.dt() + dot(diff, nd.dW0[k]);
        if (nu < sg.nu_min) {
            nu = 2.0 * sg.nu_min - nu;
            ++out.boundary_events;
        } else if (nu > sg.nu_max) {
            nu = 2.0 * sg.nu_max - nu;
            ++out.boundary_events;
        }
        out.nu[k + 1] = nu;
    }
    out.flagged = out.boundary_events > grid.M / 100;
    return out;
}

// Aggregated particle-cloud results for one common path. Per-particle state
// is streamed, not stored; the bundle keeps the conditional-mean series and
// the discrete backward-equation residual statistics.
struct PathBundle {
    std::vector<double> nu;       // common conditional mean path
    std::vector<double> mean_X;   // particle average per step
    std::vector<Vec> mean_Y;      // particle average per step
    std::size_t particles = 0;
    double bsde_residual_rms = 0.0;
    bool low_particle_warning = false;
};

struct ParticleConfig {
    std::size_t particles = 1000;
    double xi_mean = 0.0;
    double xi_std = 0.0;
    std::uint64_t idio_seed = 1;  // seeds particle streams (stream index 1 + p)
};

inline PathBundle simulate_particles(const GeneralSpec& gs, const RiccatiSolution& P,
                                     const PhiField& Phi, const NuPath& nu_path,
                                     const NoiseDraw& nd, const ParticleConfig& pc) {
    const TimeGrid& grid = Phi.grid();
    if (nu_path.nu.size() != grid.size()) throw std::invalid_argument("simulate_particles: grid mismatch");
    const std::size_t n = gs.n, d = gs.d, M = grid.M;
    const double dt = grid.dt(), sdt = std::sqrt(dt);

    PathBundle out;
    out.nu = nu_path.nu;
    out.particles = pc.particles;
    out.low_particle_warning = pc.particles < 100;
    out.mean_X.assign(M + 1, 0.0);
    out.mean_Y.assign(M + 1, Vec(n, 0.0));

    // Per-step quantities shared by all particles.
    std::vector<Vec> p_nodes(M + 1), phi_nodes(M + 1), ybar_nodes(M + 1), dnuphi_nodes(M + 1),
        diff_nu_nodes(M + 1), sigma_nodes(M + 1), s0_nodes(M + 1), s1_nodes(M + 1),
        f0_nodes(M + 1), f1_nodes(M + 1), b2_nodes(M + 1);
    std::vector<Mat> s2_nodes(M + 1), f2_nodes(M + 1);
    std::vector<double> b0_nodes(M + 1), b1_nodes(M + 1);
    for (std::size_t k = 0; k <= M; ++k) {
        const double t = grid.node(k);
        p_nodes[k] = P.at_node(k);
        phi_nodes[k] = Phi.eval(t, nu_path.nu[k]);
        ybar_nodes[k].assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            ybar_nodes[k][i] = p_nodes[k][i] * nu_path.nu[k] + phi_nodes[k][i];
        dnuphi_nodes[k] = Phi.dnu(t, nu_path.nu[k]);
        diff_nu_nodes[k] = detail::nu_diffusion(gs, t, nu_path.nu[k], ybar_nodes[k]);
        sigma_nodes[k] = gs.sigma(t);
        b0_nodes[k] = gs.b0(t, nu_path.nu[k], ybar_nodes[k]);
        s0_nodes[k] = gs.sigma0(t, nu_path.nu[k], ybar_nodes[k]);
        s1_nodes[k] = gs.sigma1(t);
        s2_nodes[k] = gs.sigma2(t);
        f0_nodes[k] = gs.f0(t, nu_path.nu[k], ybar_nodes[k]);
        f1_nodes[k] = gs.f1(t);
        f2_nodes[k] = gs.f2(t);
        b1_nodes[k] = gs.b1(t);
        b2_nodes[k] = gs.b2(t);
    }

    double res_sq = 0.0;
    std::size_t res_count = 0;
    Vec dW(d);

    for (std::size_t pidx = 0; pidx < pc.particles; ++pidx) {
        Philox rng(pc.idio_seed, 1 + pidx);
        double x = pc.xi_mean + pc.xi_std * rng.normal();
        Vec y_prev(n), y_cur(n);
        for (std::size_t k = 0; k < M; ++k) {
            const Vec& p = p_nodes[k];
            for (std::size_t i = 0; i < n; ++i) y_cur[i] = p[i] * x + phi_nodes[k][i];
            out.mean_X[k] += x;
            for (std::size_t i = 0; i < n; ++i) out.mean_Y[k][i] += y_cur[i];

            for (std::size_t c = 0; c < d; ++c) dW[c] = sdt * rng.normal();

            Vec svec(d);
            for (std::size_t c = 0; c < d; ++c) {
                svec[c] = s1_nodes[k][c] * x + s0_nodes[k][c];
                for (std::size_t i = 0; i < n; ++i) svec[c] += y_cur[i] * s2_nodes[k](i, c);
            }
            const double drift = b1_nodes[k] * x + dot(b2_nodes[k], y_cur) + b0_nodes[k];
            const double x_next =
                x + drift * dt + dot(sigma_nodes[k], dW) + dot(svec, nd.dW0[k]);

            // discrete backward-equation residual on this step
            const Vec& p1 = p_nodes[k + 1];
            for (std::size_t i = 0; i < n; ++i) y_prev[i] = p1[i] * x_next + phi_nodes[k + 1][i];
            const Vec& f0 = f0_nodes[k];
            const Vec f2y = matvec(f2_nodes[k], y_cur);
            const double sig_dW = dot(sigma_nodes[k], dW);
            const double sv_dW0 = dot(svec, nd.dW0[k]);
            const double dnu_dW0 = dot(diff_nu_nodes[k], nd.dW0[k]);
            for (std::size_t i = 0; i < n; ++i) {
                const double zdW = p[i] * sig_dW;                    // Z = P sigma(t)
                const double z0dW0 = p[i] * sv_dW0 + dnuphi_nodes[k][i] * dnu_dW0;
                const double r = y_prev[i] - y_cur[i] +
                                 (f1_nodes[k][i] * x + f2y[i] + f0[i]) * dt - zdW - z0dW0;
                res_sq += r * r;
                ++res_count;
            }
            x = x_next;
        }
        out.mean_X[M] += x;
        const Vec& pT = p_nodes[M];
        for (std::size_t i = 0; i < n; ++i) out.mean_Y[M][i] += pT[i] * x + phi_nodes[M][i];
    }
    const double inv = 1.0 / static_cast<double>(pc.particles);
    for (std::size_t k = 0; k <= M; ++k) {
        out.mean_X[k] *= inv;
        for (double& v : out.mean_Y[k]) v *= inv;
    }
    out.bsde_residual_rms = res_count ? std::sqrt(res_sq / static_cast<double>(res_count)) : 0.0;
    return out;
}

struct MomentDeviation {
    std::vector<double> dev_X;  // mean_X - nu per step
    std::vector<double> dev_Y;  // inf-norm of mean_Y - (P nu + Phi) per step
    double max_rel_dev_X = 0.0;
    double max_rel_dev_Y = 0.0;
    bool low_particle_warning = false;
};

inline MomentDeviation estimate_conditional_moments(const PathBundle& bundle,
                                                    const RiccatiSolution& P,
                                                    const PhiField& Phi) {
    const TimeGrid& grid = Phi.grid();
    MomentDeviation md;
    md.low_particle_warning = bundle.particles < 100;
    md.dev_X.resize(grid.size());
    md.dev_Y.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double nu = bundle.nu[k];
        md.dev_X[k] = bundle.mean_X[k] - nu;
        const Vec p = P.at_node(k);
        Vec ybar = Phi.eval(grid.node(k), nu);
        for (std::size_t i = 0; i < ybar.size(); ++i) ybar[i] += p[i] * nu;
        md.dev_Y[k] = norm_inf(bundle.mean_Y[k] - ybar);
        const double scale = 1.0 + std::abs(nu);
        md.max_rel_dev_X = std::max(md.max_rel_dev_X, std::abs(md.dev_X[k]) / scale);
        md.max_rel_dev_Y = std::max(md.max_rel_dev_Y, md.dev_Y[k] / scale);
    }
    return md;
}

// Equilibrium control-mean path and feedback rule for an LQ scenario.
struct LqEquilibrium {
    std::vector<double> mu;  // control mean per step
    // feedback alpha(step, x, y): y is the adjoint value P x + Phi(t, nu_t)
    std::function<double(std::size_t, double, double)> alpha;
};

inline LqEquilibrium lq_equilibrium_inputs(const LqReduction& red, const RiccatiSolution& P,
                                           const PhiField& Phi, const std::vector<double>& nu_path) {
    const TimeGrid& grid = Phi.grid();
    LqEquilibrium eq;
    eq.mu.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.node(k);
        const double nu = nu_path[k];
        const double ybar = P.at_node(k)[0] * nu + Phi.eval(t, nu)[0];
        eq.mu[k] = red.mu_star(t, nu, ybar);
    }
    auto lq = red.lq;
    auto mu = eq.mu;
    auto dt = grid.dt();
    eq.alpha = [lq, mu, dt](std::size_t k, double x, double y) {
        const double t = dt * static_cast<double>(k);
        return -lq->B(t) / lq->R(t) * y - lq->F(t) / lq->R(t) * x - lq->h(t, mu[k]);
    };
    return eq;
}

struct CostEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::vector<double> per_particle;
};

// Monte Carlo cost of a feedback control against frozen equilibrium flows
// (mu, nu), left-endpoint quadrature, one common path, i.i.d. particles.
inline CostEstimate evaluate_cost(const LqReduction& red, const RiccatiSolution& P,
                                  const PhiField& Phi,
                                  const std::function<double(std::size_t, double, double)>& control,
                                  const std::vector<double>& mu_path,
                                  const std::vector<double>& nu_path, const NoiseDraw& nd,
                                  const ParticleConfig& pc) {
    const LQSpec& lq = *red.lq;
    const TimeGrid& grid = Phi.grid();
    const std::size_t M = grid.M, d = lq.d;
    const double dt = grid.dt(), sdt = std::sqrt(dt);

    CostEstimate out;
    out.per_particle.resize(pc.particles);
    Vec dW(d);
    for (std::size_t pidx = 0; pidx < pc.particles; ++pidx) {
        Philox rng(pc.idio_seed, 1 + pidx);
        double x = pc.xi_mean + pc.xi_std * rng.normal();
        double cost = 0.0;
        for (std::size_t k = 0; k < M; ++k) {
            const double t = grid.node(k);
            const double nu = nu_path[k], mu = mu_path[k];
            const double y = P.at_node(k)[0] * x + Phi.eval(t, nu)[0];
            const double a = control(k, x, y);
            const double xl = x + lq.l(t, nu);
            const double ah = a + lq.h(t, mu);
            cost += 0.5 * (lq.Q(t) * xl * xl + lq.R(t) * ah * ah +
                           2.0 * lq.F(t) * x * (a + lq.q(t, mu))) * dt;
            for (std::size_t c = 0; c < d; ++c) dW[c] = sdt * rng.normal();
            x += (lq.A(t) * x + lq.B(t) * a + lq.f(t, nu) + lq.b(t, mu)) * dt + dot(lq.sigma, dW) +
                 dot(lq.sigma0, nd.dW0[k]);
        }
        const double xg = x + lq.g(0.0, nu_path[M]);
        cost += 0.5 * lq.G * xg * xg;
        out.per_particle[pidx] = cost;
        out.mean += cost;
    }
    out.mean /= static_cast<double>(pc.particles);
    double var = 0.0;
    for (double c : out.per_particle) var += (c - out.mean) * (c - out.mean);
    if (pc.particles > 1) var /= static_cast<double>(pc.particles - 1);
    out.se = std::sqrt(var / static_cast<double>(pc.particles));
    return out;
}

}  // namespace mfg
