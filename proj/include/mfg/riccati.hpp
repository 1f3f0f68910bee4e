#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/spec.hpp"

namespace mfg {

struct RiccatiError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Backward vector Riccati ODE
//   dP/dt = -(b2 . P) P - f2 P - b1 P - f1,   P(T) = h1,
// solved by fixed-step RK4 on the master grid. Values are stored at nodes;
// interpolation is cubic Hermite using the exact ODE right-hand side as slope.
class RiccatiSolution {
public:
    RiccatiSolution(TimeGrid grid, std::vector<Vec> values, std::function<Vec(double, const Vec&)> rhs,
                    double bound_certificate)
        : grid_(grid), values_(std::move(values)), rhs_(std::move(rhs)), bound_(bound_certificate) {}

    const TimeGrid& grid() const { return grid_; }
    const Vec& at_node(std::size_t k) const { return values_[k]; }
    std::size_t n() const { return values_.front().size(); }

    Vec eval(double t) const {
        const double dt = grid_.dt();
        if (t <= 0.0) return values_.front();
        if (t >= grid_.T) return values_.back();
        const std::size_t k = std::min(static_cast<std::size_t>(t / dt), grid_.M - 1);
        const double s = (t - grid_.node(k)) / dt;
        const Vec &p0 = values_[k], &p1 = values_[k + 1];
        const Vec m0 = rhs_(grid_.node(k), p0), m1 = rhs_(grid_.node(k + 1), p1);
        // Hermite basis
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        Vec out(p0.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = h00 * p0[i] + h10 * dt * m0[i] + h01 * p1[i] + h11 * dt * m1[i];
        return out;
    }

    // dP/dt via the ODE right-hand side (exact at nodes).
    Vec deriv(double t) const { return rhs_(t, eval(t)); }

    double sup_norm() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, norm_inf(v));
        return m;
    }

    double bound_certificate() const { return bound_; }

    bool componentwise_nonnegative(double tol = 1e-12) const {
        for (const auto& v : values_)
            for (double x : v)
                if (x < -tol) return false;
        return true;
    }

private:
    TimeGrid grid_;
    std::vector<Vec> values_;  // values_[k] = P(t_k)
    std::function<Vec(double, const Vec&)> rhs_;
    double bound_;
};

namespace detail {

inline Vec riccati_rhs(const GeneralSpec& gs, double t, const Vec& p) {
    const Vec b2 = gs.b2(t), f1 = gs.f1(t);
    const Mat f2 = gs.f2(t);
    const double b1 = gs.b1(t);
    const double b2p = dot(b2, p);
    Vec f2p = matvec(f2, p);
    Vec out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = -b2p * p[i] - f2p[i] - b1 * p[i] - f1[i];
    return out;
}

// Explicit certificate C = (K + KT) e^{(2K + nK C)T}, iterated to
// self-consistency from the linear-part bound; capped, since any upper bound
// the computed P respects is an admissible certificate.
inline double riccati_bound_certificate(const GeneralSpec& gs, const TimeGrid& grid) {
    const double K = gs.K, T = grid.T;
    const double n = static_cast<double>(gs.n);
    double c = (K + K * T) * std::exp(2.0 * K * T);
    for (int i = 0; i < 8; ++i) {
        const double next = (K + K * T) * std::exp((2.0 * K + n * K * std::min(c, 20.0 / T)) * T);
        if (!std::isfinite(next) || next > 1e300) return 1e300;
        if (std::abs(next - c) < 1e-9 * c) return next;
        c = next;
    }
    return c;
}

}  // namespace detail

inline RiccatiSolution solve_riccati(const GeneralSpec& gs, const TimeGrid& grid) {
    const double dt = grid.dt();
    const double blowup_guard = 10.0 * std::exp(3.0 * gs.K * grid.T) * (gs.K + 1.0);
    auto rhs = [&gs](double t, const Vec& p) { return detail::riccati_rhs(gs, t, p); };

    auto integrate = [&](std::size_t substeps) {
        std::vector<Vec> vals(grid.size());
        vals[grid.M] = gs.h1;  // terminal value exact
        const double h = -dt / static_cast<double>(substeps);
        for (std::size_t k = grid.M; k-- > 0;) {
            Vec p = vals[k + 1];
            double t = grid.node(k + 1);
            for (std::size_t s = 0; s < substeps; ++s) {
                const Vec k1 = rhs(t, p);
                const Vec k2 = rhs(t + 0.5 * h, p + (0.5 * h) * k1);
                const Vec k3 = rhs(t + 0.5 * h, p + (0.5 * h) * k2);
                const Vec k4 = rhs(t + h, p + h * k3);
                for (std::size_t i = 0; i < p.size(); ++i)
                    p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                t += h;
            }
            if (norm_inf(p) > blowup_guard)
                throw RiccatiError("Riccati blow-up guard tripped at t=" + std::to_string(t) +
                                   " (assumption violation?)");
            vals[k] = std::move(p);
        }
        return vals;
    };

    auto vals = integrate(1);
    auto vals_half = integrate(2);
    double disagreement = 0.0;
    for (std::size_t k = 0; k < vals.size(); ++k)
        disagreement = std::max(disagreement, norm_inf(vals[k] - vals_half[k]));
    if (disagreement > 1e-6)
        throw RiccatiError("Riccati step-halving disagreement " + format_g17(disagreement) +
                           " exceeds 1e-6; refine the grid");

    std::function<Vec(double, const Vec&)> rhs_fn = rhs;
    // Capture coefficients by value so the solution outlives the call site.
    GeneralSpec gs_copy = gs;
    rhs_fn = [gs_copy](double t, const Vec& p) { return detail::riccati_rhs(gs_copy, t, p); };
    return RiccatiSolution(grid, std::move(vals), std::move(rhs_fn),
                           detail::riccati_bound_certificate(gs, grid));
}

}  // namespace mfg
