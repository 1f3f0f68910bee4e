#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mfg/coefficients.hpp"
#include "mfg/core.hpp"
#include "mfg/sampling.hpp"

namespace mfg {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Simulation / discretization configuration.
struct SimConfig {
    std::size_t particles = 10000;
    std::size_t n_paths = 16;
    std::uint64_t seed = 1234;
    double nu_min = -5.0;
    double nu_max = 5.0;
    double dnu = 1e-2;
    double newton_tol = 1e-12;
    std::size_t newton_max_iter = 100;

    void validate() const {
        if (particles < 1) throw ValidationError("SimConfig: particles must be >= 1");
        if (!(nu_min < nu_max)) throw ValidationError("SimConfig: nu_min < nu_max violated");
        if (!(dnu > 0.0)) throw ValidationError("SimConfig: dnu must be positive");
    }
};

// Full data of the LQ extended mean field game (scalar state, scalar control).
struct LQSpec {
    ScalarCoefficient A, B, Q, R, F;
    double G = 1.0;
    Vec sigma, sigma0;  // constant vectors in R^d
    NonlinearMap f, b, l, h, q;
    NonlinearMap g;  // time-independent terminal interaction
    std::size_t d = 1;
    double K = 5.0;     // declared bound/Lipschitz constant
    double eps0 = 0.5;  // margin for |1 + h'|
};

// Coefficients of the general conditional mean field FBSDE. Backward
// component is R^n-valued, noise is d-dimensional.
struct GeneralSpec {
    std::size_t n = 1;
    std::size_t d = 1;
    double K = 5.0;

    std::function<double(double)> b1;
    std::function<Vec(double)> b2, f1;
    std::function<Mat(double)> f2;       // n x n
    std::function<Vec(double)> sigma1;   // R^d
    std::function<Mat(double)> sigma2;   // n x d
    std::function<Vec(double)> sigma;    // R^d (idiosyncratic)
    Vec h1;                              // R^n
    std::function<double(double, double, const Vec&)> b0;   // (t, xbar, ybar)
    std::function<Vec(double, double, const Vec&)> f0;      // -> R^n
    std::function<Vec(double, double, const Vec&)> sigma0;  // -> R^d
    std::function<Vec(double)> h2;                          // R -> R^n

    bool degenerate_common_noise(double t) const {
        Vec s1 = sigma1(t);
        Mat s2 = sigma2(t);
        Vec s0 = sigma0(t, 0.0, Vec(n, 0.0));
        return norm_inf(s1) == 0.0 && norm_inf(s2.data) == 0.0 && norm_inf(s0) == 0.0;
    }
};

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw ParseError("unknown key '" + it.key() + "' in " + where);
    }
}

inline Vec get_vec(const json& j, const char* key, std::size_t d) {
    if (!j.contains(key)) return Vec(d, 0.0);
    auto v = j.at(key);
    if (v.is_number()) return Vec(1, v.get<double>());
    Vec out = v.get<Vec>();
    if (out.size() != d) throw ParseError(std::string(key) + ": expected dimension " + std::to_string(d));
    return out;
}

}  // namespace detail

// Numerical validation of the LQ standing invariants on grid nodes and a
// low-discrepancy sample of the x-domain. Returns human-readable violations.
inline std::vector<std::string> validate_lq(const LQSpec& lq, const TimeGrid& grid,
                                            const SampleBounds& bounds, std::size_t nsamples = 400) {
    std::vector<std::string> errs;
    for (std::size_t k = 0; k <= grid.M; ++k) {
        const double t = grid.node(k);
        if (!(lq.R(t) > 0.0)) {
            errs.push_back("R(t) > 0 violated at t=" + std::to_string(t));
            break;
        }
    }
    if (!(lq.G > 0.0)) errs.push_back("G > 0 violated");
    for (std::size_t k = 0; k <= grid.M; ++k) {
        const double t = grid.node(k);
        if (lq.R(t) > 0.0 && lq.Q(t) - lq.F(t) * lq.F(t) / lq.R(t) < -1e-12) {
            errs.push_back("Q(t) - F(t)^2/R(t) >= 0 violated at t=" + std::to_string(t));
            break;
        }
    }
    if (lq.sigma.size() != lq.d || lq.sigma0.size() != lq.d)
        errs.push_back("sigma/sigma0 dimension mismatch with d");

    SampleBounds sb = bounds;
    sb.t_hi = grid.T;
    auto pts = sample_domain(sb, nsamples, 7);
    for (const auto& p : pts) {
        if (std::abs(1.0 + lq.h.d1(p.t, p.xbar)) < lq.eps0) {
            errs.push_back("(B3) margin violated: |1 + h'(t,x)| < eps0 at t=" + std::to_string(p.t) +
                           ", x=" + std::to_string(p.xbar));
            break;
        }
    }
    // Lipschitz estimates against the declared K.
    const NonlinearMap* maps[] = {&lq.f, &lq.b, &lq.l, &lq.h, &lq.q, &lq.g};
    const char* names[] = {"f", "b", "l", "h", "q", "g"};
    for (int i = 0; i < 6; ++i) {
        for (const auto& p : pts) {
            if (std::abs(maps[i]->d1(p.t, p.xbar)) > lq.K) {
                errs.push_back(std::string("(B2) Lipschitz bound exceeded for ") + names[i]);
                break;
            }
        }
    }
    return errs;
}

inline NonlinearMap map_from_config(const json& j, const std::string& where) {
    try {
        return NonlinearMap::from_json(j);
    } catch (const std::exception& e) {
        throw ParseError(where + ": " + e.what());
    }
}

inline ScalarCoefficient coeff_from_config(const json& j, const std::string& where) {
    try {
        if (j.is_number()) return ScalarCoefficient::constant(j.get<double>());
        return ScalarCoefficient::from_json(j);
    } catch (const std::exception& e) {
        throw ParseError(where + ": " + e.what());
    }
}

// Parses and validates an LQ spec from a JSON config object.
inline LQSpec lq_from_json(const json& j, const TimeGrid& grid, const SampleBounds& bounds) {
    detail::reject_unknown_keys(j,
                                {"kind", "A", "B", "Q", "R", "F", "G", "sigma", "sigma0", "f", "b",
                                 "l", "h", "q", "g", "d", "K", "eps0"},
                                "lq spec");
    LQSpec lq;
    lq.d = j.value("d", std::size_t{1});
    lq.A = coeff_from_config(j.value("A", json(0.0)), "A");
    lq.B = coeff_from_config(j.value("B", json(0.0)), "B");
    lq.Q = coeff_from_config(j.value("Q", json(0.0)), "Q");
    lq.R = coeff_from_config(j.value("R", json(1.0)), "R");
    lq.F = coeff_from_config(j.value("F", json(0.0)), "F");
    lq.G = j.value("G", 1.0);
    lq.sigma = detail::get_vec(j, "sigma", lq.d);
    lq.sigma0 = detail::get_vec(j, "sigma0", lq.d);
    const json zero = json{{"type", "zero"}};
    lq.f = map_from_config(j.value("f", zero), "f");
    lq.b = map_from_config(j.value("b", zero), "b");
    lq.l = map_from_config(j.value("l", zero), "l");
    lq.h = map_from_config(j.value("h", zero), "h");
    lq.q = map_from_config(j.value("q", zero), "q");
    lq.g = map_from_config(j.value("g", zero), "g");
    lq.K = j.value("K", 5.0);
    lq.eps0 = j.value("eps0", 0.5);

    auto errs = validate_lq(lq, grid, bounds);
    if (!errs.empty()) throw ValidationError(errs.front());
    return lq;
}

// Canonical JSON echo of an LQ spec (round-trip support).
inline json lq_to_json(const LQSpec& lq) {
    json j;
    j["kind"] = "lq";
    j["A"] = lq.A.descriptor();
    j["B"] = lq.B.descriptor();
    j["Q"] = lq.Q.descriptor();
    j["R"] = lq.R.descriptor();
    j["F"] = lq.F.descriptor();
    j["G"] = lq.G;
    j["sigma"] = lq.sigma;
    j["sigma0"] = lq.sigma0;
    j["f"] = lq.f.descriptor();
    j["b"] = lq.b.descriptor();
    j["l"] = lq.l.descriptor();
    j["h"] = lq.h.descriptor();
    j["q"] = lq.q.descriptor();
    j["g"] = lq.g.descriptor();
    j["d"] = lq.d;
    j["K"] = lq.K;
    j["eps0"] = lq.eps0;
    return j;
}

// Parses a scalar (n = 1) general spec whose nonlinear coefficients separate
// as b0(t,x,y) = b0x(t,x) + b0y(t,y), and similarly for f0.
inline GeneralSpec general_from_json(const json& j, const TimeGrid& grid) {
    detail::reject_unknown_keys(
        j, {"kind", "b1", "b2", "f1", "f2", "sigma1", "sigma2", "sigma", "h1", "b0x", "b0y", "f0x",
            "f0y", "h2", "K", "d"},
        "general spec");
    GeneralSpec gs;
    gs.n = 1;
    gs.d = j.value("d", std::size_t{1});
    gs.K = j.value("K", 5.0);
    auto b1 = coeff_from_config(j.value("b1", json(0.0)), "b1");
    auto b2 = coeff_from_config(j.value("b2", json(0.0)), "b2");
    auto f1 = coeff_from_config(j.value("f1", json(0.0)), "f1");
    auto f2 = coeff_from_config(j.value("f2", json(0.0)), "f2");
    gs.b1 = [b1](double t) { return b1(t); };
    gs.b2 = [b2](double t) { return Vec{b2(t)}; };
    gs.f1 = [f1](double t) { return Vec{f1(t)}; };
    gs.f2 = [f2](double t) {
        Mat m(1, 1);
        m(0, 0) = f2(t);
        return m;
    };
    const std::size_t d = gs.d;
    const Vec s1 = detail::get_vec(j, "sigma1", d);
    const Vec s2row = detail::get_vec(j, "sigma2", d);
    const Vec sig = detail::get_vec(j, "sigma", d);
    gs.sigma1 = [s1](double) { return s1; };
    gs.sigma2 = [s2row, d](double) {
        Mat m(1, d);
        for (std::size_t i = 0; i < d; ++i) m(0, i) = s2row[i];
        return m;
    };
    gs.sigma = [sig](double) { return sig; };
    gs.h1 = Vec{j.value("h1", 0.0)};
    const json zero = json{{"type", "zero"}};
    auto b0x = map_from_config(j.value("b0x", zero), "b0x");
    auto b0y = map_from_config(j.value("b0y", zero), "b0y");
    auto f0x = map_from_config(j.value("f0x", zero), "f0x");
    auto f0y = map_from_config(j.value("f0y", zero), "f0y");
    auto h2m = map_from_config(j.value("h2", zero), "h2");
    gs.b0 = [b0x, b0y](double t, double x, const Vec& y) { return b0x(t, x) + b0y(t, y[0]); };
    gs.f0 = [f0x, f0y](double t, double x, const Vec& y) { return Vec{f0x(t, x) + f0y(t, y[0])}; };
    gs.sigma0 = [d](double, double, const Vec&) { return Vec(d, 0.0); };
    gs.h2 = [h2m](double x) { return Vec{h2m(0.0, x)}; };
    (void)grid;
    return gs;
}

using SpecVariant = std::variant<LQSpec, GeneralSpec>;

// Config ingestion entry point: parses structured text (JSON), dispatches on
// "kind", validates all invariants.
inline SpecVariant load_spec(const std::string& config_text, const TimeGrid& grid,
                             const SampleBounds& bounds = SampleBounds{}) {
    json j;
    try {
        j = json::parse(config_text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("config parse error: ") + e.what());
    }
    const std::string kind = j.value("kind", "lq");
    if (kind == "lq") return lq_from_json(j, grid, bounds);
    if (kind == "general") return general_from_json(j, grid);
    throw ParseError("unknown spec kind: " + kind);
}

}  // namespace mfg
