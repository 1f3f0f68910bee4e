#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfg/core.hpp"

namespace mfg {

using json = nlohmann::json;

// Deterministic time coefficient t -> R. Built-in analytic families plus a
// piecewise-constant table; the JSON descriptor is kept so a loaded spec
// serializes back bit-identically.
class ScalarCoefficient {
public:
    ScalarCoefficient() {
        desc_ = json{{"type", "constant"}, {"value", 0.0}};
        eval_ = [](double) { return 0.0; };
    }

    static ScalarCoefficient constant(double v) {
        return from_json(json{{"type", "constant"}, {"value", v}});
    }

    static ScalarCoefficient affine(double a, double b) {
        return from_json(json{{"type", "affine"}, {"a", a}, {"b", b}});
    }

    static ScalarCoefficient from_json(const json& j) {
        ScalarCoefficient c;
        c.desc_ = j;
        const std::string type = j.at("type").get<std::string>();
        if (type == "constant") {
            const double v = j.at("value").get<double>();
            require_keys(j, {"type", "value"});
            c.eval_ = [v](double) { return v; };
        } else if (type == "affine") {
            // a + b t
            const double a = j.at("a").get<double>(), b = j.at("b").get<double>();
            require_keys(j, {"type", "a", "b"});
            c.eval_ = [a, b](double t) { return a + b * t; };
        } else if (type == "sin") {
            // a + b sin(w t)
            const double a = j.at("a").get<double>(), b = j.at("b").get<double>(),
                         w = j.at("omega").get<double>();
            require_keys(j, {"type", "a", "b", "omega"});
            c.eval_ = [a, b, w](double t) { return a + b * std::sin(w * t); };
        } else if (type == "table") {
            // Piecewise constant on a uniform grid over [0, T].
            const auto vals = j.at("values").get<std::vector<double>>();
            const double T = j.at("T").get<double>();
            require_keys(j, {"type", "values", "T"});
            if (vals.empty()) throw std::invalid_argument("table coefficient: empty values");
            c.eval_ = [vals, T](double t) {
                const double u = std::clamp(t / T, 0.0, 1.0) * static_cast<double>(vals.size());
                const std::size_t k = std::min(static_cast<std::size_t>(u), vals.size() - 1);
                return vals[k];
            };
        } else {
            throw std::invalid_argument("unknown coefficient type: " + type);
        }
        return c;
    }

    double operator()(double t) const { return eval_(t); }
    const json& descriptor() const { return desc_; }

private:
    static void require_keys(const json& j, std::initializer_list<const char*> allowed) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool ok = false;
            for (const char* k : allowed) ok = ok || it.key() == k;
            if (!ok) throw std::invalid_argument("unknown key in coefficient: " + it.key());
        }
    }

    json desc_;
    std::function<double(double)> eval_;
};

// Nonlinear map (t, x) -> R with first/second derivative access. Families have
// analytic derivatives; a custom callable falls back to central differences.
class NonlinearMap {
public:
    static constexpr double kFdStep = 1e-5;

    NonlinearMap() {
        desc_ = json{{"type", "zero"}};
        f_ = [](double, double) { return 0.0; };
        d1_ = [](double, double) { return 0.0; };
        d2_ = [](double, double) { return 0.0; };
    }

    static NonlinearMap zero() { return from_json(json{{"type", "zero"}}); }

    static NonlinearMap linear(double c) {
        return from_json(json{{"type", "linear"}, {"c", c}});
    }

    static NonlinearMap tanh_map(double amp, double scale = 1.0) {
        return from_json(json{{"type", "tanh"}, {"amp", amp}, {"scale", scale}});
    }

    static NonlinearMap from_json(const json& j) {
        NonlinearMap m;
        m.desc_ = j;
        const std::string type = j.at("type").get<std::string>();
        if (type == "zero") {
            m.f_ = [](double, double) { return 0.0; };
            m.d1_ = [](double, double) { return 0.0; };
            m.d2_ = [](double, double) { return 0.0; };
        } else if (type == "linear") {
            const double c = j.at("c").get<double>();
            m.f_ = [c](double, double x) { return c * x; };
            m.d1_ = [c](double, double) { return c; };
            m.d2_ = [](double, double) { return 0.0; };
        } else if (type == "tanh") {
            const double a = j.at("amp").get<double>();
            const double s = j.value("scale", 1.0);
            m.f_ = [a, s](double, double x) { return a * std::tanh(s * x); };
            m.d1_ = [a, s](double, double x) {
                const double c = std::cosh(s * x);
                return a * s / (c * c);
            };
            m.d2_ = [a, s](double, double x) {
                const double th = std::tanh(s * x);
                const double c = std::cosh(s * x);
                return -2.0 * a * s * s * th / (c * c);
            };
        } else if (type == "sin") {
            const double a = j.at("amp").get<double>();
            const double w = j.value("omega", 1.0);
            m.f_ = [a, w](double, double x) { return a * std::sin(w * x); };
            m.d1_ = [a, w](double, double x) { return a * w * std::cos(w * x); };
            m.d2_ = [a, w](double, double x) { return -a * w * w * std::sin(w * x); };
        } else {
            throw std::invalid_argument("unknown nonlinear map type: " + type);
        }
        return m;
    }

    // Custom rule; derivatives by central differences.
    static NonlinearMap custom(std::function<double(double, double)> f) {
        NonlinearMap m;
        m.desc_ = json{{"type", "custom"}};
        m.f_ = std::move(f);
        auto fn = m.f_;
        m.d1_ = [fn](double t, double x) {
            return (fn(t, x + kFdStep) - fn(t, x - kFdStep)) / (2.0 * kFdStep);
        };
        m.d2_ = [fn](double t, double x) {
            return (fn(t, x + kFdStep) - 2.0 * fn(t, x) + fn(t, x - kFdStep)) / (kFdStep * kFdStep);
        };
        return m;
    }

    double operator()(double t, double x) const { return f_(t, x); }
    double d1(double t, double x) const { return d1_(t, x); }
    double d2(double t, double x) const { return d2_(t, x); }
    const json& descriptor() const { return desc_; }
    bool is_zero() const { return desc_.value("type", "") == "zero"; }

private:
    json desc_;
    std::function<double(double, double)> f_, d1_, d2_;
};

}  // namespace mfg
