#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mfg/rng.hpp"

namespace mfg {

struct SamplePoint {
    double t, xbar, ybar;
};

struct SampleBounds {
    double t_lo = 0.0, t_hi = 1.0;
    double x_lo = -5.0, x_hi = 5.0;
    double y_lo = -5.0, y_hi = 5.0;
};

// Halton sequence in bases (2,3,5) with a seeded Cranley-Patterson rotation.
// Deterministic for a fixed seed.
inline std::vector<SamplePoint> sample_domain(const SampleBounds& b, std::size_t count,
                                              std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample_domain: count must be >= 1");
    if (b.t_lo > b.t_hi || b.x_lo > b.x_hi || b.y_lo > b.y_hi)
        throw std::invalid_argument("sample_domain: degenerate bounds");

    auto halton = [](std::size_t i, unsigned base) {
        double f = 1.0, r = 0.0;
        for (std::size_t n = i + 1; n > 0; n /= base) {
            f /= base;
            r += f * static_cast<double>(n % base);
        }
        return r;
    };

    Philox rng(seed, 0x5a3c0de);
    const std::array<double, 3> shift = {rng.uniform01(), rng.uniform01(), rng.uniform01()};

    std::vector<SamplePoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u0 = std::fmod(halton(i, 2) + shift[0], 1.0);
        const double u1 = std::fmod(halton(i, 3) + shift[1], 1.0);
        const double u2 = std::fmod(halton(i, 5) + shift[2], 1.0);
        out.push_back({b.t_lo + u0 * (b.t_hi - b.t_lo), b.x_lo + u1 * (b.x_hi - b.x_lo),
                       b.y_lo + u2 * (b.y_hi - b.y_lo)});
    }
    return out;
}

}  // namespace mfg
