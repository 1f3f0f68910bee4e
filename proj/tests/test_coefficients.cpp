#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mfg/coefficients.hpp"

using namespace mfg;

TEST_CASE("scalar coefficient families evaluate correctly") {
    CHECK(ScalarCoefficient::constant(2.5)(0.3) == 2.5);
    CHECK(ScalarCoefficient::affine(1.0, 2.0)(0.25) == Catch::Approx(1.5));
    auto s = ScalarCoefficient::from_json(
        json{{"type", "sin"}, {"a", 1.0}, {"b", 0.5}, {"omega", 2.0}});
    CHECK(s(0.7) == Catch::Approx(1.0 + 0.5 * std::sin(1.4)));
    auto tab = ScalarCoefficient::from_json(
        json{{"type", "table"}, {"values", std::vector<double>{1.0, 2.0, 3.0}}, {"T", 1.0}});
    CHECK(tab(0.1) == 1.0);
    CHECK(tab(0.5) == 2.0);
    CHECK(tab(0.99) == 3.0);
    CHECK(tab(1.0) == 3.0);
}

TEST_CASE("unknown coefficient keys are rejected") {
    CHECK_THROWS_AS(
        ScalarCoefficient::from_json(json{{"type", "constant"}, {"value", 1.0}, {"oops", 2}}),
        std::invalid_argument);
    CHECK_THROWS_AS(ScalarCoefficient::from_json(json{{"type", "cubic"}}), std::invalid_argument);
    CHECK_THROWS_AS(NonlinearMap::from_json(json{{"type", "exp"}}), std::invalid_argument);
}

TEST_CASE("descriptors round-trip") {
    auto c = ScalarCoefficient::affine(0.5, -2.0);
    auto c2 = ScalarCoefficient::from_json(c.descriptor());
    CHECK(c(0.37) == c2(0.37));
    auto m = NonlinearMap::tanh_map(0.2, 1.5);
    auto m2 = NonlinearMap::from_json(m.descriptor());
    CHECK(m(0.1, 0.9) == m2(0.1, 0.9));
}

TEST_CASE("analytic derivatives agree with finite differences at 100 points") {
    const double fd = 1e-6;
    auto maps = {NonlinearMap::tanh_map(0.2), NonlinearMap::tanh_map(-0.3, 2.0),
                 NonlinearMap::from_json(json{{"type", "sin"}, {"amp", 0.4}, {"omega", 3.0}}),
                 NonlinearMap::linear(1.7)};
    for (const auto& m : maps) {
        for (int i = 0; i < 100; ++i) {
            const double x = -3.0 + 6.0 * i / 99.0;
            const double d1_fd = (m(0, x + fd) - m(0, x - fd)) / (2 * fd);
            const double d2_fd = (m.d1(0, x + fd) - m.d1(0, x - fd)) / (2 * fd);
            CHECK(m.d1(0, x) == Catch::Approx(d1_fd).margin(1e-7));
            CHECK(m.d2(0, x) == Catch::Approx(d2_fd).margin(1e-6));
        }
    }
}

TEST_CASE("custom maps fall back to finite differences") {
    auto m = NonlinearMap::custom([](double, double x) { return x * x * x; });
    CHECK(m(0, 2.0) == 8.0);
    CHECK(m.d1(0, 2.0) == Catch::Approx(12.0).margin(1e-6));
    CHECK(m.d2(0, 2.0) == Catch::Approx(12.0).margin(1e-3));
    CHECK_FALSE(m.is_zero());
    CHECK(NonlinearMap::zero().is_zero());
}
