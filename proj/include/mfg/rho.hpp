#pragma once

#include <cmath>
#include <stdexcept>

#include "mfg/coefficients.hpp"

namespace mfg {

struct RhoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inverse of m -> m + h(t, m). Well defined when |1 + h'| >= eps0: the map is
// then strictly monotone in m, so a bracket always exists. Newton first,
// bisection on stagnation.
inline double invert_rho(const NonlinearMap& h, double eps0, double t, double z,
                         double tol = 1e-12, std::size_t max_iter = 100) {
    auto g = [&](double m) { return m + h(t, m) - z; };

    double m = z;  // exact when h == 0
    for (std::size_t it = 0; it < max_iter; ++it) {
        const double r = g(m);
        if (std::abs(r) <= tol) return m;
        const double slope = 1.0 + h.d1(t, m);
        if (std::abs(slope) < 0.5 * eps0) break;  // suspicious slope, go bisect
        m -= r / slope;
    }

    // Bracket by expansion around z. Monotone with |slope| >= eps0 means the
    // root lies within |m - z| <= |h(t, z) ... | / eps0; expand until sign change.
    const bool increasing = 1.0 + h.d1(t, z) > 0.0;
    double step = std::max(1.0, std::abs(g(z)) / eps0);
    double lo = z, hi = z;
    for (int i = 0; i < 64; ++i) {
        lo = z - step;
        hi = z + step;
        const double glo = increasing ? g(lo) : g(hi);
        const double ghi = increasing ? g(hi) : g(lo);
        if (glo <= 0.0 && ghi >= 0.0) break;
        step *= 2.0;
        if (i == 63) throw RhoError("invert_rho: failed to bracket root (is (B3) violated?)");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (std::abs(gm) <= tol || 0.5 * (hi - lo) < 1e-16 * (1.0 + std::abs(mid))) return mid;
        const bool go_right = increasing ? (gm < 0.0) : (gm > 0.0);
        (go_right ? lo : hi) = mid;
    }
    const double mid = 0.5 * (lo + hi);
    if (std::abs(g(mid)) > 1e-8)
        throw RhoError("invert_rho: no convergence (signals (B3) violation off the sampled set)");
    return mid;
}

}  // namespace mfg
