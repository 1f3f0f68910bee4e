#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/riccati.hpp"
#include "mfg/spec.hpp"

namespace mfg {

struct CflError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PdeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Decoupling-field slice Phi(t, nu) in R^n on a (time x space) grid.
// Bilinear interpolation between nodes; finite-difference derivative access.
class PhiField {
public:
    PhiField(TimeGrid grid, SpaceGrid sgrid, std::size_t n)
        : grid_(grid), sgrid_(sgrid), n_(n), values_(grid.size(), std::vector<Vec>(sgrid.size(), Vec(n, 0.0))) {}

    const TimeGrid& grid() const { return grid_; }
    const SpaceGrid& sgrid() const { return sgrid_; }
    std::size_t n() const { return n_; }

    Vec& at(std::size_t k, std::size_t j) { return values_[k][j]; }
    const Vec& at(std::size_t k, std::size_t j) const { return values_[k][j]; }

    bool inside(double nu) const { return nu >= sgrid_.nu_min && nu <= sgrid_.nu_max; }

    Vec eval(double t, double nu) const {
        if (!inside(nu))
            throw std::out_of_range("PhiField: nu=" + std::to_string(nu) + " outside domain");
        const double dt = grid_.dt(), dnu = sgrid_.dnu();
        const double tc = std::clamp(t, 0.0, grid_.T);
        const std::size_t k = std::min(static_cast<std::size_t>(tc / dt), grid_.M - 1);
        const std::size_t j =
            std::min(static_cast<std::size_t>((nu - sgrid_.nu_min) / dnu), sgrid_.J - 1);
        const double s = (tc - grid_.node(k)) / dt;
        const double u = (nu - sgrid_.node(j)) / dnu;
        Vec out(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const double a = values_[k][j][i], b = values_[k][j + 1][i];
            const double c = values_[k + 1][j][i], d = values_[k + 1][j + 1][i];
            out[i] = (1 - s) * ((1 - u) * a + u * b) + s * ((1 - u) * c + u * d);
        }
        return out;
    }

    // Central in the interior, second-order one-sided at the boundary.
    Vec dnu_at(std::size_t k, std::size_t j) const {
        const double dnu = sgrid_.dnu();
        Vec out(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            if (j == 0)
                out[i] = (-3.0 * values_[k][0][i] + 4.0 * values_[k][1][i] - values_[k][2][i]) /
                         (2.0 * dnu);
            else if (j == sgrid_.J)
                out[i] = (3.0 * values_[k][j][i] - 4.0 * values_[k][j - 1][i] +
                          values_[k][j - 2][i]) /
                         (2.0 * dnu);
            else
                out[i] = (values_[k][j + 1][i] - values_[k][j - 1][i]) / (2.0 * dnu);
        }
        return out;
    }

    Vec dnunu_at(std::size_t k, std::size_t j) const {
        const double dnu = sgrid_.dnu();
        const std::size_t jj = std::clamp(j, std::size_t{1}, sgrid_.J - 1);
        Vec out(n_);
        for (std::size_t i = 0; i < n_; ++i)
            out[i] = (values_[k][jj + 1][i] - 2.0 * values_[k][jj][i] + values_[k][jj - 1][i]) /
                     (dnu * dnu);
        return out;
    }

    Vec dnu(double t, double nu) const {
        const std::size_t k = nearest_time_index(t);
        const std::size_t j = nearest_space_index(nu);
        return dnu_at(k, j);
    }

    std::size_t nearest_time_index(double t) const {
        const double u = std::clamp(t, 0.0, grid_.T) / grid_.dt();
        return std::min(static_cast<std::size_t>(u + 0.5), grid_.M);
    }

    std::size_t nearest_space_index(double nu) const {
        const double u = (std::clamp(nu, sgrid_.nu_min, sgrid_.nu_max) - sgrid_.nu_min) / sgrid_.dnu();
        return std::min(static_cast<std::size_t>(u + 0.5), sgrid_.J);
    }

    // Max grid slope of Phi along nu over all times, inf-norm across components.
    double max_grid_slope() const {
        double m = 0.0;
        for (std::size_t k = 0; k <= grid_.M; ++k)
            for (std::size_t j = 0; j < sgrid_.J; ++j)
                m = std::max(m, norm_inf(values_[k][j + 1] - values_[k][j]) / sgrid_.dnu());
        return m;
    }

private:
    TimeGrid grid_;
    SpaceGrid sgrid_;
    std::size_t n_;
    std::vector<std::vector<Vec>> values_;  // [time][space]
};

namespace detail {

// Common-noise diffusion row of the nu dynamics at (t, nu), y = P nu + phi.
inline Vec nu_diffusion(const GeneralSpec& gs, double t, double nu, const Vec& y) {
    Vec s = gs.sigma1(t);
    for (double& v : s) v *= nu;
    const Mat s2 = gs.sigma2(t);
    for (std::size_t c = 0; c < gs.d; ++c)
        for (std::size_t i = 0; i < gs.n; ++i) s[c] += y[i] * s2(i, c);
    const Vec s0 = gs.sigma0(t, nu, y);
    for (std::size_t c = 0; c < gs.d; ++c) s[c] += s0[c];
    return s;
}

// Drift of the nu dynamics at (t, nu) given P(t) and phi.
inline double nu_drift(const GeneralSpec& gs, double t, double nu, const Vec& p, const Vec& phi,
                       const Vec& y) {
    return (gs.b1(t) + dot(gs.b2(t), p)) * nu + dot(gs.b2(t), phi) + gs.b0(t, nu, y);
}

// Reaction term of the Phi PDE: (b2 . phi) P + f2 phi + f0 + P b0.
inline Vec phi_reaction(const GeneralSpec& gs, double t, double nu, const Vec& p, const Vec& phi,
                        const Vec& y) {
    const double b2phi = dot(gs.b2(t), phi);
    Vec r = matvec(gs.f2(t), phi);
    const Vec f0 = gs.f0(t, nu, y);
    const double b0 = gs.b0(t, nu, y);
    for (std::size_t i = 0; i < gs.n; ++i) r[i] += b2phi * p[i] + f0[i] + b0 * p[i];
    return r;
}

}  // namespace detail

// Backward IMEX sweep for the semilinear PDE
//   dPhi/dt + drift * dPhi/dnu + (1/2)|diff|^2 d2Phi/dnu2 + reaction = 0,
//   Phi(T, nu) = h2(nu).
// Diffusion implicit (shared tridiagonal factorization across components),
// advection by second-order upwind-biased differences, nonlinear terms
// explicit. Fully degenerate diffusion is allowed.
inline PhiField solve_phi(const GeneralSpec& gs, const RiccatiSolution& P, const TimeGrid& grid,
                          const SpaceGrid& sgrid) {
    const std::size_t n = gs.n, J = sgrid.J;
    const double dt = grid.dt(), dnu = sgrid.dnu();
    PhiField phi(grid, sgrid, n);

    for (std::size_t j = 0; j <= J; ++j) phi.at(grid.M, j) = gs.h2(sgrid.node(j));

    std::vector<Vec> star(J + 1, Vec(n));
    Vec sub(J + 1), diag(J + 1), super(J + 1), rhs(J + 1), Dj(J + 1);

    for (std::size_t k = grid.M; k-- > 0;) {
        const double t1 = grid.node(k + 1);
        const Vec p = P.at_node(k + 1);

        double max_drift = 0.0;
        for (std::size_t j = 0; j <= J; ++j) {
            const double nu = sgrid.node(j);
            const Vec& ph = phi.at(k + 1, j);
            Vec y(n);
            for (std::size_t i = 0; i < n; ++i) y[i] = p[i] * nu + ph[i];

            const double a = detail::nu_drift(gs, t1, nu, p, ph, y);
            max_drift = std::max(max_drift, std::abs(a));
            const Vec diff = detail::nu_diffusion(gs, t1, nu, y);
            Dj[j] = 0.5 * dot(diff, diff);
            const Vec r = detail::phi_reaction(gs, t1, nu, p, ph, y);

            // upwind-biased dPhi/dnu (second order where the stencil fits)
            Vec grad(n);
            for (std::size_t i = 0; i < n; ++i) {
                auto v = [&](std::size_t jj) { return phi.at(k + 1, jj)[i]; };
                if (a >= 0.0) {
                    if (j + 2 <= J)
                        grad[i] = (-3.0 * v(j) + 4.0 * v(j + 1) - v(j + 2)) / (2.0 * dnu);
                    else if (j + 1 <= J)
                        grad[i] = (v(j + 1) - v(j)) / dnu;
                    else
                        grad[i] = (3.0 * v(j) - 4.0 * v(j - 1) + v(j - 2)) / (2.0 * dnu);
                } else {
                    if (j >= 2)
                        grad[i] = (3.0 * v(j) - 4.0 * v(j - 1) + v(j - 2)) / (2.0 * dnu);
                    else if (j >= 1)
                        grad[i] = (v(j) - v(j - 1)) / dnu;
                    else
                        grad[i] = (-3.0 * v(j) + 4.0 * v(j + 1) - v(j + 2)) / (2.0 * dnu);
                }
            }
            for (std::size_t i = 0; i < n; ++i) star[j][i] = ph[i] + dt * (a * grad[i] + r[i]);
        }

        const double cfl = dt * max_drift / dnu;
        if (cfl > 0.9)
            throw CflError("CFL violation: dt*max|drift|/dnu = " + format_g17(cfl) +
                           "; required dt <= " + format_g17(0.9 * dnu / max_drift));

        // implicit diffusion: (I - dt D d2/dnu2) Phi_k = Phi*; boundary rows
        // keep the linearity-extrapolation closure (no curvature at the edge).
        for (std::size_t j = 0; j <= J; ++j) {
            const double th = dt * Dj[j] / (dnu * dnu);
            if (j == 0 || j == J) {
                sub[j] = 0.0;
                diag[j] = 1.0;
                super[j] = 0.0;
            } else {
                sub[j] = -th;
                diag[j] = 1.0 + 2.0 * th;
                super[j] = -th;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= J; ++j) rhs[j] = star[j][i];
            solve_tridiagonal(sub, diag, super, rhs);
            for (std::size_t j = 0; j <= J; ++j) phi.at(k, j)[i] = rhs[j];
        }
        // boundary closure: extrapolate linearly from the interior
        for (std::size_t i = 0; i < n; ++i) {
            phi.at(k, 0)[i] = 2.0 * phi.at(k, 1)[i] - phi.at(k, 2)[i];
            phi.at(k, J)[i] = 2.0 * phi.at(k, J - 1)[i] - phi.at(k, J - 2)[i];
        }
        for (std::size_t j = 0; j <= J; ++j)
            for (double v : phi.at(k, j))
                if (!std::isfinite(v)) throw PdeError("solve_phi: non-finite value at t=" + std::to_string(grid.node(k)));
    }
    return phi;
}

// Master field U(t, x, nu) = P(t) x + Phi(t, nu).
struct MasterField {
    const RiccatiSolution* P;
    const PhiField* Phi;

    Vec eval_U(double t, double x, double nu) const {
        if (!Phi->inside(nu))
            throw std::out_of_range("eval_U: nu outside domain (no silent extrapolation)");
        Vec u = Phi->eval(t, nu);
        const Vec p = P->eval(t);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += p[i] * x;
        return u;
    }

    // E[U(t, xi, nu)] for E[xi] = nu collapses to P nu + Phi by linearity.
    Vec mean_U(double t, double nu) const { return eval_U(t, nu, nu); }

    // sup over grid of the slope of nu -> P nu + Phi(t, nu).
    double decoupling_slope_sup() const {
        double m = 0.0;
        const auto& g = Phi->grid();
        const auto& s = Phi->sgrid();
        for (std::size_t k = 0; k <= g.M; ++k) {
            const Vec p = P->at_node(k);
            for (std::size_t j = 0; j < s.J; ++j) {
                Vec slope = Phi->at(k, j + 1) - Phi->at(k, j);
                for (std::size_t i = 0; i < slope.size(); ++i)
                    slope[i] = slope[i] / s.dnu() + p[i];
                m = std::max(m, norm_inf(slope));
            }
        }
        return m;
    }
};

// Term-by-term assembly of the master-equation left-hand side at a grid node.
struct MasterResidualTerms {
    Vec total;
    Vec x_second_order;  // the dxx and dxnu contributions alone
};

// Residual of the general master equation for U = P x + Phi at interior node
// (k, j) of the field grids, with x arbitrary. Time derivative of Phi by
// central difference, of P by the exact ODE right-hand side.
inline MasterResidualTerms master_residual(const MasterField& mf, const GeneralSpec& gs,
                                           std::size_t k, double x, std::size_t j) {
    const auto& grid = mf.Phi->grid();
    const auto& sgrid = mf.Phi->sgrid();
    if (k == 0 || k >= grid.M || j == 0 || j >= sgrid.J)
        throw std::out_of_range("master_residual: point must be interior to the grid");

    const double t = grid.node(k), nu = sgrid.node(j), dt = grid.dt();
    const std::size_t n = gs.n;
    const Vec p = mf.P->at_node(k);
    const Vec dp = mf.P->deriv(t);
    const Vec& phi = mf.Phi->at(k, j);
    Vec dtphi(n);
    for (std::size_t i = 0; i < n; ++i)
        dtphi[i] = (mf.Phi->at(k + 1, j)[i] - mf.Phi->at(k - 1, j)[i]) / (2.0 * dt);
    const Vec dnuphi = mf.Phi->dnu_at(k, j);
    const Vec dnunuphi = mf.Phi->dnunu_at(k, j);

    Vec U(n), Ubar(n);
    for (std::size_t i = 0; i < n; ++i) {
        U[i] = p[i] * x + phi[i];
        Ubar[i] = p[i] * nu + phi[i];
    }

    const double b0 = gs.b0(t, nu, Ubar);
    const Vec f0 = gs.f0(t, nu, Ubar);
    const Vec b2 = gs.b2(t), f1 = gs.f1(t);
    const Mat f2 = gs.f2(t);
    const double b1 = gs.b1(t);

    const double drift_x = b1 * x + dot(b2, U) + b0;
    const double drift_nu = b1 * nu + dot(b2, Ubar) + b0;
    const Vec diff_nu = detail::nu_diffusion(gs, t, nu, Ubar);
    const Vec f2U = matvec(f2, U);

    MasterResidualTerms out;
    out.total.assign(n, 0.0);
    out.x_second_order.assign(n, 0.0);  // dxxU and dxnuU vanish identically for P x + Phi
    for (std::size_t i = 0; i < n; ++i) {
        out.total[i] = (dp[i] * x + dtphi[i])             // dtU
                       + p[i] * drift_x                   // dxU [.]
                       + dnuphi[i] * drift_nu             // dnuU [.]
                       + 0.5 * dnunuphi[i] * dot(diff_nu, diff_nu)
                       + f1[i] * x + f2U[i] + f0[i];
    }
    return out;
}

}  // namespace mfg
