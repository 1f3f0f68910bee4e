#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mfg/rho.hpp"
#include "mfg/rng.hpp"

using namespace mfg;

namespace {

// Independent oracle: bisection on m + h(t, m) = z over an expanding bracket.
double bisect_rho(const NonlinearMap& h, double t, double z) {
    auto g = [&](double m) { return m + h(t, m) - z; };
    double lo = z - 1.0, hi = z + 1.0;
    while (g(lo) > 0.0) lo -= 1.0;
    while (g(hi) < 0.0) hi += 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("newton inversion matches the bisection oracle") {
    const auto h = NonlinearMap::tanh_map(0.2);
    Philox rng(99, 0);
    for (int i = 0; i < 2000; ++i) {
        const double t = rng.uniform01();
        const double z = -4.0 + 8.0 * rng.uniform01();
        const double rho = invert_rho(h, 0.5, t, z);
        CHECK(std::abs(rho - bisect_rho(h, t, z)) < 1e-9);
        CHECK(std::abs(rho + h(t, rho) - z) <= 1e-10);
    }
}

TEST_CASE("inversion survives a steep but admissible h") {
    // 1 + h' in [0.5, 1.5]: still strictly monotone.
    const auto h = NonlinearMap::from_json(json{{"type", "sin"}, {"amp", 0.5}, {"omega", 1.0}});
    for (double z : {-3.0, -0.7, 0.0, 1.3, 4.0}) {
        const double rho = invert_rho(h, 0.5, 0.0, z);
        CHECK(std::abs(rho + h(0.0, rho) - z) <= 1e-10);
    }
}

TEST_CASE("degenerate consistency map is reported, not looped on") {
    // h(m) = -m makes m + h(m) constant; no z other than 0 has a preimage.
    const auto h = NonlinearMap::linear(-1.0);
    CHECK_THROWS_AS(invert_rho(h, 0.5, 0.0, 1.0), RhoError);
}

TEST_CASE("identity when h vanishes") {
    const auto h = NonlinearMap::zero();
    CHECK(invert_rho(h, 0.5, 0.3, 1.75) == Catch::Approx(1.75).margin(1e-14));
}
