#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/phi_field.hpp"
#include "mfg/riccati.hpp"
#include "mfg/rng.hpp"
#include "mfg/spec.hpp"

namespace mfg {

struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Coupled deterministic (nu, phi) system: the representation FBSDE with the
// common-noise terms removed. State vector is [nu, phi_1..phi_n].
inline Vec nu_phi_rhs(const GeneralSpec& gs, const RiccatiSolution& P, double t, const Vec& s) {
    const std::size_t n = gs.n;
    const double nu = s[0];
    const Vec p = P.eval(t);
    Vec phi(s.begin() + 1, s.end());
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = p[i] * nu + phi[i];

    Vec out(n + 1);
    out[0] = nu_drift(gs, t, nu, p, phi, y);
    const Vec r = phi_reaction(gs, t, nu, p, phi, y);
    for (std::size_t i = 0; i < n; ++i) out[i + 1] = -r[i];
    return out;
}

using OdeRhs = std::function<Vec(double, const Vec&)>;

inline Vec rk4_step(const OdeRhs& f, double t, const Vec& y, double h) {
    const Vec k1 = f(t, y);
    const Vec k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
    const Vec k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
    const Vec k4 = f(t + h, y + h * k3);
    Vec out = y;
    for (std::size_t i = 0; i < y.size(); ++i)
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

inline std::vector<Vec> rk4_integrate(const OdeRhs& f, double t0, double t1, const Vec& y0,
                                      std::size_t nsteps) {
    std::vector<Vec> traj(nsteps + 1);
    traj[0] = y0;
    const double h = (t1 - t0) / static_cast<double>(nsteps);
    for (std::size_t k = 0; k < nsteps; ++k)
        traj[k + 1] = rk4_step(f, t0 + h * static_cast<double>(k), traj[k], h);
    return traj;
}

// Cash-Karp embedded RK45, adaptive step; returns the terminal state only.
inline Vec rk45_integrate(const OdeRhs& f, double t0, double t1, Vec y, double tol) {
    static const double a2 = 0.2, a3 = 0.3, a4 = 0.6, a5 = 1.0, a6 = 0.875;
    static const double b21 = 0.2;
    static const double b31 = 3.0 / 40, b32 = 9.0 / 40;
    static const double b41 = 0.3, b42 = -0.9, b43 = 1.2;
    static const double b51 = -11.0 / 54, b52 = 2.5, b53 = -70.0 / 27, b54 = 35.0 / 27;
    static const double b61 = 1631.0 / 55296, b62 = 175.0 / 512, b63 = 575.0 / 13824,
                        b64 = 44275.0 / 110592, b65 = 253.0 / 4096;
    static const double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594, c6 = 512.0 / 1771;
    static const double d1 = c1 - 2825.0 / 27648, d3 = c3 - 18575.0 / 48384,
                        d4 = c4 - 13525.0 / 55296, d5 = -277.0 / 14336, d6 = c6 - 0.25;

    double t = t0;
    double h = (t1 - t0) / 100.0;
    const double dir = h >= 0 ? 1.0 : -1.0;
    int guard = 0;
    while (dir * (t1 - t) > 1e-14) {
        if (++guard > 2000000) throw OracleError("rk45: step limit exceeded");
        if (dir * (t + h - t1) > 0.0) h = t1 - t;
        const Vec k1 = f(t, y);
        const Vec k2 = f(t + a2 * h, y + (b21 * h) * k1);
        const Vec k3 = f(t + a3 * h, y + h * (b31 * k1 + b32 * k2));
        const Vec k4 = f(t + a4 * h, y + h * (b41 * k1 + b42 * k2 + b43 * k3));
        const Vec k5 = f(t + a5 * h, y + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4));
        const Vec k6 = f(t + a6 * h, y + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5));
        double err = 0.0;
        Vec ynew = y;
        for (std::size_t i = 0; i < y.size(); ++i) {
            ynew[i] += h * (c1 * k1[i] + c3 * k3[i] + c4 * k4[i] + c6 * k6[i]);
            err = std::max(err, std::abs(h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                              d6 * k6[i])));
        }
        if (err <= tol || std::abs(h) < 1e-12) {
            t += h;
            y = std::move(ynew);
        }
        const double scale = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 2.0;
        h *= std::clamp(scale, 0.2, 5.0);
    }
    return y;
}

}  // namespace detail

// Deterministic two-point boundary value solution of the degenerate
// representation FBSDE.
struct TPBVPSolution {
    std::vector<double> times;
    std::vector<double> nu;
    std::vector<Vec> phi;
    double terminal_mismatch = 0.0;
    std::size_t newton_iters = 0;

    const Vec& phi_at_start() const { return phi.front(); }
};

/// Shooting on the initial backward value phi(t0): Newton with a forward-
// difference Jacobian, RK4 inner integration at a tenth of the master step,
// random restarts on stagnation.
inline TPBVPSolution shoot_tpbvp(const GeneralSpec& gs, const RiccatiSolution& P,
                                 const TimeGrid& grid, double t0, double eta,
                                 double tol = 1e-10) {
    if (!gs.degenerate_common_noise(0.5 * (t0 + grid.T)))
        throw OracleError("shoot_tpbvp: spec must have degenerate common-noise diffusion");
    const std::size_t n = gs.n;
    const std::size_t fine = (grid.M > 0 ? grid.M : 100) * 10;

    detail::OdeRhs rhs = [&](double t, const Vec& s) { return detail::nu_phi_rhs(gs, P, t, s); };

    auto mismatch = [&](const Vec& phi0, std::vector<Vec>* traj_out) {
        Vec s0(n + 1);
        s0[0] = eta;
        for (std::size_t i = 0; i < n; ++i) s0[i + 1] = phi0[i];
        auto traj = detail::rk4_integrate(rhs, t0, grid.T, s0, fine);
        const Vec& sT = traj.back();
        const Vec target = gs.h2(sT[0]);
        Vec mm(n);
        for (std::size_t i = 0; i < n; ++i) mm[i] = sT[i + 1] - target[i];
        if (traj_out) *traj_out = std::move(traj);
        return mm;
    };

    Philox restart_rng(20240717, 0);
    Vec phi0 = gs.h2(eta);  // warm start from the terminal map
    std::vector<Vec> traj;
    std::size_t total_iters = 0;
    for (int attempt = 0; attempt < 11; ++attempt) {
        bool converged = false;
        for (std::size_t it = 0; it < 50; ++it) {
            ++total_iters;
            Vec mm = mismatch(phi0, &traj);
            if (norm_inf(mm) <= tol) {
                converged = true;
                break;
            }
            // forward-difference Jacobian of the mismatch in phi0
            Mat jac(n, n);
            const double fd = 1e-7;
            for (std::size_t c = 0; c < n; ++c) {
                Vec pert = phi0;
                pert[c] += fd;
                const Vec mmp = mismatch(pert, nullptr);
                for (std::size_t r = 0; r < n; ++r) jac(r, c) = (mmp[r] - mm[r]) / fd;
            }
            if (n == 1) {
                if (std::abs(jac(0, 0)) < 1e-14) break;
                phi0[0] -= mm[0] / jac(0, 0);
            } else {
                // Gaussian elimination with partial pivoting
                Vec rhsv = mm;
                std::vector<std::size_t> piv(n);
                for (std::size_t i = 0; i < n; ++i) piv[i] = i;
                bool singular = false;
                for (std::size_t c = 0; c < n && !singular; ++c) {
                    std::size_t best = c;
                    for (std::size_t r = c + 1; r < n; ++r)
                        if (std::abs(jac(r, c)) > std::abs(jac(best, c))) best = r;
                    if (std::abs(jac(best, c)) < 1e-14) {
                        singular = true;
                        break;
                    }
                    if (best != c)
                        for (std::size_t cc = 0; cc < n; ++cc) {
                            std::swap(jac(c, cc), jac(best, cc));
                            std::swap(rhsv[c], rhsv[best]);
                        }
                    for (std::size_t r = c + 1; r < n; ++r) {
                        const double m = jac(r, c) / jac(c, c);
                        for (std::size_t cc = c; cc < n; ++cc) jac(r, cc) -= m * jac(c, cc);
                        rhsv[r] -= m * rhsv[c];
                    }
                }
                if (singular) break;
                for (std::size_t r = n; r-- > 0;) {
                    double s = rhsv[r];
                    for (std::size_t cc = r + 1; cc < n; ++cc) s -= jac(r, cc) * rhsv[cc];
                    rhsv[r] = s / jac(r, r);
                }
                for (std::size_t i = 0; i < n; ++i) phi0[i] -= rhsv[i];
            }
        }
        if (converged) {
            TPBVPSolution sol;
            sol.newton_iters = total_iters;
            sol.times.resize(traj.size());
            sol.nu.resize(traj.size());
            sol.phi.resize(traj.size());
            const double h = (grid.T - t0) / static_cast<double>(fine);
            for (std::size_t k = 0; k < traj.size(); ++k) {
                sol.times[k] = t0 + h * static_cast<double>(k);
                sol.nu[k] = traj[k][0];
                sol.phi[k].assign(traj[k].begin() + 1, traj[k].end());
            }
            Vec mm = mismatch(sol.phi.front(), nullptr);
            sol.terminal_mismatch = norm_inf(mm);
            return sol;
        }
        // random restart
        for (std::size_t i = 0; i < n; ++i)
            phi0[i] = gs.h2(eta)[i] + 2.0 * (restart_rng.uniform01() - 0.5);
    }
    throw OracleError("shoot_tpbvp: Newton stagnation after restarts (assumption violation or "
                      "domain exit?)");
}

// Same terminal-value solve with the adaptive integrator; used to cross-check
// fixtures against an independent inner integrator.
inline Vec shoot_tpbvp_rk45_phi0(const GeneralSpec& gs, const RiccatiSolution& P,
                                 const TimeGrid& grid, double t0, double eta, double tol = 1e-10,
                                 double ode_tol = 1e-11) {
    const std::size_t n = gs.n;
    detail::OdeRhs rhs = [&](double t, const Vec& s) { return detail::nu_phi_rhs(gs, P, t, s); };
    auto mismatch = [&](const Vec& phi0) {
        Vec s0(n + 1);
        s0[0] = eta;
        for (std::size_t i = 0; i < n; ++i) s0[i + 1] = phi0[i];
        const Vec sT = detail::rk45_integrate(rhs, t0, grid.T, s0, ode_tol);
        const Vec target = gs.h2(sT[0]);
        Vec mm(n);
        for (std::size_t i = 0; i < n; ++i) mm[i] = sT[i + 1] - target[i];
        return mm;
    };
    Vec phi0 = gs.h2(eta);
    for (std::size_t it = 0; it < 80; ++it) {
        const Vec mm = mismatch(phi0);
        if (norm_inf(mm) <= tol) return phi0;
        const double fd = 1e-7;
        Mat jac(n, n);
        for (std::size_t c = 0; c < n; ++c) {
            Vec pert = phi0;
            pert[c] += fd;
            const Vec mmp = mismatch(pert);
            for (std::size_t r = 0; r < n; ++r) jac(r, c) = (mmp[r] - mm[r]) / fd;
        }
        if (n != 1) throw OracleError("rk45 shooting: only n=1 supported");
        phi0[0] -= mm[0] / jac(0, 0);
    }
    throw OracleError("shoot_tpbvp_rk45: no convergence");
}

// Deterministic fixed-point trajectories of the conditional-expectation map.
struct PicardResult {
    std::vector<double> times;
    std::vector<double> xbar;
    std::vector<Vec> ybar;
    std::vector<Vec> phi;
    std::size_t iterations = 0;
    std::vector<double> update_history;
    bool converged = false;
};

// Plain Picard iteration on the map (xbar, ybar) -> (E[X], E[Y]) in the
/// degenerate case: backward linear phi-ODE with frozen inputs, then the
// forward mean equation, with optional damping. Uniqueness, not
// contractivity, is what the theory gives, so non-convergence is reported
// with history rather than asserted away.
inline PicardResult picard_map(const GeneralSpec& gs, const RiccatiSolution& P,
                               const TimeGrid& grid, double xi_mean, std::size_t max_iters = 200,
                               double tol = 1e-10, double damping = 1.0) {
    const std::size_t n = gs.n;
    const std::size_t fine = grid.M * 10;
    const double h = grid.T / static_cast<double>(fine);

    std::vector<double> xbar(fine + 1, xi_mean);
    std::vector<Vec> ybar(fine + 1, Vec(n, 0.0));
    for (std::size_t k = 0; k <= fine; ++k) {
        const Vec p = P.eval(h * static_cast<double>(k));
        for (std::size_t i = 0; i < n; ++i) ybar[k][i] = p[i] * xi_mean;
    }

    auto interp_x = [&](double t) {
        const double u = std::clamp(t / grid.T, 0.0, 1.0) * static_cast<double>(fine);
        const std::size_t k = std::min(static_cast<std::size_t>(u), fine - 1);
        const double s = u - static_cast<double>(k);
        return (1 - s) * xbar[k] + s * xbar[k + 1];
    };
    auto interp_y = [&](double t) {
        const double u = std::clamp(t / grid.T, 0.0, 1.0) * static_cast<double>(fine);
        const std::size_t k = std::min(static_cast<std::size_t>(u), fine - 1);
        const double s = u - static_cast<double>(k);
        Vec out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = (1 - s) * ybar[k][i] + s * ybar[k + 1][i];
        return out;
    };

    PicardResult res;
    std::vector<Vec> phi(fine + 1, Vec(n, 0.0));
    for (std::size_t it = 0; it < max_iters; ++it) {
        ++res.iterations;
        // backward phi-ODE with frozen (xbar, ybar)
        phi[fine] = gs.h2(xbar[fine]);
        for (std::size_t k = fine; k-- > 0;) {
            const double t = h * static_cast<double>(k + 1);
            detail::OdeRhs fwd = [&](double tt, const Vec& ph) {
                const Vec p = P.eval(tt);
                const double b2phi = dot(gs.b2(tt), ph);
                Vec r = matvec(gs.f2(tt), ph);
                const Vec f0 = gs.f0(tt, interp_x(tt), interp_y(tt));
                const double b0 = gs.b0(tt, interp_x(tt), interp_y(tt));
                for (std::size_t i = 0; i < n; ++i)
                    r[i] = -(r[i] + b2phi * p[i] + f0[i] + b0 * p[i]);
                return r;
            };
            phi[k] = detail::rk4_step(fwd, t, phi[k + 1], -h);
        }
        // forward mean equation
        std::vector<double> xn(fine + 1);
        xn[0] = xi_mean;
        auto interp_phi = [&](double t) {
            const double u = std::clamp(t / grid.T, 0.0, 1.0) * static_cast<double>(fine);
            const std::size_t k = std::min(static_cast<std::size_t>(u), fine - 1);
            const double s = u - static_cast<double>(k);
            Vec out(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = (1 - s) * phi[k][i] + s * phi[k + 1][i];
            return out;
        };
        detail::OdeRhs x_rhs = [&](double t, const Vec& xv) {
            const Vec p = P.eval(t);
            const Vec ph = interp_phi(t);
            Vec y(n);
            for (std::size_t i = 0; i < n; ++i) y[i] = p[i] * xv[0] + ph[i];
            return Vec{gs.b1(t) * xv[0] + dot(gs.b2(t), y) + gs.b0(t, interp_x(t), interp_y(t))};
        };
        for (std::size_t k = 0; k < fine; ++k)
            xn[k + 1] = detail::rk4_step(x_rhs, h * static_cast<double>(k), Vec{xn[k]}, h)[0];

        double update = 0.0;
        for (std::size_t k = 0; k <= fine; ++k) {
            const Vec p = P.eval(h * static_cast<double>(k));
            const double xnew = damping * xn[k] + (1.0 - damping) * xbar[k];
            update = std::max(update, std::abs(xnew - xbar[k]));
            xbar[k] = xnew;
            for (std::size_t i = 0; i < n; ++i) {
                const double ynew = p[i] * xn[k] + phi[k][i];
                const double mixed = damping * ynew + (1.0 - damping) * ybar[k][i];
                update = std::max(update, std::abs(mixed - ybar[k][i]));
                ybar[k][i] = mixed;
            }
        }
        res.update_history.push_back(update);
        if (update <= tol) {
            res.converged = true;
            break;
        }
    }
    res.times.resize(fine + 1);
    for (std::size_t k = 0; k <= fine; ++k) res.times[k] = h * static_cast<double>(k);
    res.xbar = xbar;
    res.ybar = ybar;
    res.phi = phi;
    return res;
}

}  // namespace mfg
