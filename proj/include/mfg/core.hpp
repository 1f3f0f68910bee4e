#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfg {

inline constexpr double kPi = 3.14159265358979323846;

using Vec = std::vector<double>;
// Row-major n x m matrix.
struct Mat {
    std::size_t rows = 0, cols = 0;
    Vec data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline Vec operator+(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vec operator-(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline Vec operator*(double c, Vec a) {
    for (double& v : a) v *= c;
    return a;
}

// y = M x for n x n matrix.
inline Vec matvec(const Mat& m, const Vec& x) {
    Vec y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) y[i] += m(i, j) * x[j];
    return y;
}

// Uniform grid on [0, T] with M steps (M+1 nodes).
struct TimeGrid {
    double T = 1.0;
    std::size_t M = 100;

    TimeGrid() = default;
    TimeGrid(double horizon, std::size_t steps) : T(horizon), M(steps) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: T must be positive");
        if (M < 2) throw std::invalid_argument("TimeGrid: need at least 2 steps");
    }

    double dt() const { return T / static_cast<double>(M); }
    double node(std::size_t k) const { return k == M ? T : dt() * static_cast<double>(k); }
    std::size_t size() const { return M + 1; }
};

// Uniform spatial grid on [nu_min, nu_max] with J cells (J+1 nodes).
struct SpaceGrid {
    double nu_min = -5.0, nu_max = 5.0;
    std::size_t J = 200;

    SpaceGrid() = default;
    SpaceGrid(double lo, double hi, std::size_t cells) : nu_min(lo), nu_max(hi), J(cells) {
        if (!(nu_min < nu_max)) throw std::invalid_argument("SpaceGrid: empty domain");
        if (J < 4) throw std::invalid_argument("SpaceGrid: need at least 4 cells");
    }

    double dnu() const { return (nu_max - nu_min) / static_cast<double>(J); }
    double node(std::size_t j) const { return j == J ? nu_max : nu_min + dnu() * static_cast<double>(j); }
    std::size_t size() const { return J + 1; }
};

// Thomas algorithm; diagonals given as (sub, diag, super) of length m (sub[0], super[m-1] unused).
inline void solve_tridiagonal(const Vec& sub, const Vec& diag, const Vec& super, Vec& rhs) {
    const std::size_t m = diag.size();
    Vec c(m), d(m);
    c[0] = super[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < m; ++i) {
        const double denom = diag[i] - sub[i] * c[i - 1];
        c[i] = super[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    rhs[m - 1] = d[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] = d[i] - c[i] * rhs[i + 1];
}

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace mfg
