#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/phi_field.hpp"
#include "mfg/reduction.hpp"
#include "mfg/riccati.hpp"
#include "mfg/rng.hpp"
#include "mfg/spec.hpp"

namespace mfg {

struct NPlayerConfig {
    std::size_t N = 5;
    std::size_t trials = 16;
    std::uint64_t seed = 0;
    double xi_mean = 0.0;
    double xi_std = 0.0;
};

struct ExploitabilityResult {
    std::size_t N = 0;
    double gap_mean = 0.0;  // cost(symmetric profile) - cost(best response)
    double gap_se = 0.0;
    double baseline_mean = 0.0;
    double br_mean = 0.0;
    std::vector<double> gaps;  // per trial
};

namespace detail {

inline double clamp_to(const SpaceGrid& sg, double nu) {
    return std::clamp(nu, sg.nu_min, sg.nu_max);
}

// Realized running + terminal cost increment helpers live inline below; the
// cost uses left-endpoint quadrature matching the particle simulator.

}  // namespace detail

// Exploitability of the symmetric profile in which every player applies the
// limiting feedback with the empirical mean of the other players in place of
// the conditional mean. One trial = one common path plus N idiosyncratic
// paths. The deviating player's best response against the frozen crowd is a
// scalar linear-quadratic problem: the quadratic coefficient solves the same
// backward equation as P, and the affine part psi is integrated per trial
// along the frozen crowd flow by the trapezoid rule.
inline ExploitabilityResult estimate_exploitability(const LqReduction& red,
                                                    const RiccatiSolution& P, const PhiField& Phi,
                                                    const NPlayerConfig& cfg) {
    if (cfg.N < 2) throw std::invalid_argument("estimate_exploitability: need at least 2 players");
    if (cfg.trials < 1) throw std::invalid_argument("estimate_exploitability: need at least 1 trial");
    // Stream layout is independent of N so that runs with different player
    // counts share the common path and the first min(N, N') player paths.
    // That common-random-number coupling is what makes gap comparisons
    // across N statistically meaningful at modest trial counts.
    constexpr std::uint64_t kStreamStride = 4096;
    if (cfg.N + 1 > kStreamStride)
        throw std::invalid_argument("estimate_exploitability: too many players for stream layout");

    const LQSpec& lq = *red.lq;
    const TimeGrid& grid = Phi.grid();
    const SpaceGrid& sg = Phi.sgrid();
    const std::size_t N = cfg.N, M = grid.M, d = lq.d;
    const double dt = grid.dt(), sdt = std::sqrt(dt);

    ExploitabilityResult out;
    out.N = N;
    out.gaps.resize(cfg.trials);

    std::vector<std::vector<double>> x(N, std::vector<double>(M + 1));
    std::vector<double> nu_hat(M + 1), mu_hat(M + 1), psi(M + 1);
    std::vector<std::vector<Vec>> dW(N, std::vector<Vec>(M, Vec(d)));
    std::vector<Vec> dW0(M, Vec(d));

    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t base = trial * kStreamStride;
        {
            Philox rng(cfg.seed, base);
            for (std::size_t k = 0; k < M; ++k)
                for (std::size_t c = 0; c < d; ++c) dW0[k][c] = sdt * rng.normal();
        }
        for (std::size_t i = 0; i < N; ++i) {
            Philox rng(cfg.seed, base + 1 + i);
            x[i][0] = cfg.xi_mean + cfg.xi_std * rng.normal();
            for (std::size_t k = 0; k < M; ++k)
                for (std::size_t c = 0; c < d; ++c) dW[i][k][c] = sdt * rng.normal();
        }

        // Symmetric profile: every player applies the limiting feedback at the
        // empirical mean of the others. Record player 0's realized cost.
        double j_base = 0.0;
        for (std::size_t k = 0; k < M; ++k) {
            const double t = grid.node(k);
            double sum = 0.0;
            for (std::size_t i = 0; i < N; ++i) sum += x[i][k];
            for (std::size_t i = 0; i < N; ++i) {
                const double nu_i =
                    detail::clamp_to(sg, (sum - x[i][k]) / static_cast<double>(N - 1));
                const double ybar_i = P.at_node(k)[0] * nu_i + Phi.eval(t, nu_i)[0];
                const double mu_i = red.mu_star(t, nu_i, ybar_i);
                const double y_i = P.at_node(k)[0] * x[i][k] + Phi.eval(t, nu_i)[0];
                const double a_i = -lq.B(t) / lq.R(t) * y_i - lq.F(t) / lq.R(t) * x[i][k] -
                                   lq.h(t, mu_i);
                if (i == 0) {
                    nu_hat[k] = nu_i;
                    mu_hat[k] = mu_i;
                    const double xl = x[0][k] + lq.l(t, nu_i);
                    const double ah = a_i + lq.h(t, mu_i);
                    j_base += 0.5 * (lq.Q(t) * xl * xl + lq.R(t) * ah * ah +
                                     2.0 * lq.F(t) * x[0][k] * (a_i + lq.q(t, mu_i))) * dt;
                }
                x[i][k + 1] = x[i][k] +
                              (lq.A(t) * x[i][k] + lq.B(t) * a_i + lq.f(t, nu_i) + lq.b(t, mu_i)) * dt +
                              dot(lq.sigma, dW[i][k]) + dot(lq.sigma0, dW0[k]);
            }
        }
        {
            double sum = 0.0;
            for (std::size_t i = 0; i < N; ++i) sum += x[i][M];
            nu_hat[M] = detail::clamp_to(sg, (sum - x[0][M]) / static_cast<double>(N - 1));
            const double T = grid.T;
            const double ybar = P.at_node(M)[0] * nu_hat[M] + Phi.eval(T, nu_hat[M])[0];
            mu_hat[M] = red.mu_star(T, nu_hat[M], ybar);
            const double xg = x[0][M] + lq.g(0.0, nu_hat[M]);
            j_base += 0.5 * lq.G * xg * xg;
        }

        // Affine part of the deviating player's value along the frozen crowd:
        // psi' = -[(abar + bbar p) psi + p c + m], psi(T) = G g(nu_T), with
        // abar = A - BF/R, bbar = -B^2/R, c = f + b - B h, m = Q l + F q - F h.
        auto coef = [&](std::size_t k, double& a_out, double& r_out) {
            const double t = grid.node(k);
            const double p = P.at_node(k)[0];
            const double abar = lq.A(t) - lq.B(t) * lq.F(t) / lq.R(t);
            const double bbar = -lq.B(t) * lq.B(t) / lq.R(t);
            const double c = lq.f(t, nu_hat[k]) + lq.b(t, mu_hat[k]) - lq.B(t) * lq.h(t, mu_hat[k]);
            const double m = lq.Q(t) * lq.l(t, nu_hat[k]) + lq.F(t) * lq.q(t, mu_hat[k]) -
                             lq.F(t) * lq.h(t, mu_hat[k]);
            a_out = abar + bbar * p;
            r_out = p * c + m;
        };
        psi[M] = lq.G * lq.g(0.0, nu_hat[M]);
        for (std::size_t k = M; k-- > 0;) {
            double a0, r0, a1, r1;
            coef(k, a0, r0);
            coef(k + 1, a1, r1);
            psi[k] = (psi[k + 1] * (1.0 + 0.5 * dt * a1) + 0.5 * dt * (r0 + r1)) /
                     (1.0 - 0.5 * dt * a0);
        }

        // Replay player 0 with the best-response feedback, same noise, crowd
        // flow frozen at the symmetric-profile realization.
        double j_br = 0.0;
        double xb = x[0][0];
        for (std::size_t k = 0; k < M; ++k) {
            const double t = grid.node(k);
            const double p = P.at_node(k)[0];
            const double a = -lq.B(t) / lq.R(t) * (p * xb + psi[k]) - lq.F(t) / lq.R(t) * xb -
                             lq.h(t, mu_hat[k]);
            const double xl = xb + lq.l(t, nu_hat[k]);
            const double ah = a + lq.h(t, mu_hat[k]);
            j_br += 0.5 * (lq.Q(t) * xl * xl + lq.R(t) * ah * ah +
                           2.0 * lq.F(t) * xb * (a + lq.q(t, mu_hat[k]))) * dt;
            xb += (lq.A(t) * xb + lq.B(t) * a + lq.f(t, nu_hat[k]) + lq.b(t, mu_hat[k])) * dt +
                  dot(lq.sigma, dW[0][k]) + dot(lq.sigma0, dW0[k]);
        }
        {
            const double xg = xb + lq.g(0.0, nu_hat[M]);
            j_br += 0.5 * lq.G * xg * xg;
        }

        out.gaps[trial] = j_base - j_br;
        out.baseline_mean += j_base;
        out.br_mean += j_br;
    }

    const double inv = 1.0 / static_cast<double>(cfg.trials);
    out.baseline_mean *= inv;
    out.br_mean *= inv;
    for (double g : out.gaps) out.gap_mean += g;
    out.gap_mean *= inv;
    double var = 0.0;
    for (double g : out.gaps) var += (g - out.gap_mean) * (g - out.gap_mean);
    if (cfg.trials > 1) var /= static_cast<double>(cfg.trials - 1);
    out.gap_se = std::sqrt(var * inv);
    return out;
}

}  // namespace mfg
