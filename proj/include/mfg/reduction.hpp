#pragma once

#include <memory>

#include "mfg/rho.hpp"
#include "mfg/spec.hpp"

namespace mfg {

// LQ -> general coefficient mapping. The produced spec has n = 1 and its
// nonlinear sources route through the equilibrium control mean
// mu*(t, xbar, ybar) = rho(t, -R^-1 B ybar - R^-1 F xbar).
struct LqReduction {
    std::shared_ptr<const LQSpec> lq;
    GeneralSpec gs;

    double mu_star(double t, double xbar, double ybar) const {
        const double z = -lq->B(t) / lq->R(t) * ybar - lq->F(t) / lq->R(t) * xbar;
        return invert_rho(lq->h, lq->eps0, t, z);
    }
};

inline LqReduction lq_to_general(const LQSpec& lq_in) {
    auto lq = std::make_shared<const LQSpec>(lq_in);
    GeneralSpec gs;
    gs.n = 1;
    gs.d = lq->d;
    gs.K = lq->K;
    gs.b1 = [lq](double t) { return lq->A(t) - lq->B(t) * lq->F(t) / lq->R(t); };
    gs.b2 = [lq](double t) { return Vec{-lq->B(t) * lq->B(t) / lq->R(t)}; };
    gs.f1 = [lq](double t) { return Vec{lq->Q(t) - lq->F(t) * lq->F(t) / lq->R(t)}; };
    gs.f2 = [lq](double t) {
        Mat m(1, 1);
        m(0, 0) = lq->A(t) - lq->B(t) * lq->F(t) / lq->R(t);
        return m;
    };
    gs.sigma1 = [lq](double) { return Vec(lq->d, 0.0); };
    gs.sigma2 = [lq](double) { return Mat(1, lq->d, 0.0); };
    gs.sigma = [lq](double) { return lq->sigma; };
    gs.h1 = Vec{lq->G};
    gs.h2 = [lq](double xbar) { return Vec{lq->G * lq->g(0.0, xbar)}; };

    // b0 and f0 at one integration node share the same mu*; a per-thread
    // last-value cache avoids the duplicate inversion.
    auto mu_star = [lq](double t, double xbar, double ybar) {
        struct MemoKey {
            const void* spec;
            double t, xbar, ybar;
        };
        thread_local MemoKey key{nullptr, 0, 0, 0};
        thread_local double cached = 0.0;
        if (key.spec == lq.get() && key.t == t && key.xbar == xbar && key.ybar == ybar)
            return cached;
        const double z = -lq->B(t) / lq->R(t) * ybar - lq->F(t) / lq->R(t) * xbar;
        cached = invert_rho(lq->h, lq->eps0, t, z);
        key = {lq.get(), t, xbar, ybar};
        return cached;
    };
    gs.b0 = [lq, mu_star](double t, double xbar, const Vec& ybar) {
        const double mu = mu_star(t, xbar, ybar[0]);
        return -lq->B(t) * lq->h(t, mu) + lq->f(t, xbar) + lq->b(t, mu);
    };
    gs.f0 = [lq, mu_star](double t, double xbar, const Vec& ybar) {
        const double mu = mu_star(t, xbar, ybar[0]);
        return Vec{lq->Q(t) * lq->l(t, xbar) + lq->F(t) * lq->q(t, mu) - lq->F(t) * lq->h(t, mu)};
    };
    gs.sigma0 = [lq](double, double, const Vec&) { return lq->sigma0; };

    return LqReduction{lq, std::move(gs)};
}

}  // namespace mfg
