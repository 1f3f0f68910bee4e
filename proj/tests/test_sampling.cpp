#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "mfg/sampling.hpp"

using namespace mfg;

TEST_CASE("samples respect bounds and are deterministic") {
    SampleBounds b;
    b.t_lo = 0.0;
    b.t_hi = 2.0;
    b.x_lo = -1.0;
    b.x_hi = 3.0;
    b.y_lo = 0.0;
    b.y_hi = 1.0;
    auto pts = sample_domain(b, 500, 11);
    auto pts2 = sample_domain(b, 500, 11);
    REQUIRE(pts.size() == 500);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].t >= b.t_lo);
        CHECK(pts[i].t <= b.t_hi);
        CHECK(pts[i].xbar >= b.x_lo);
        CHECK(pts[i].xbar <= b.x_hi);
        CHECK(pts[i].ybar >= b.y_lo);
        CHECK(pts[i].ybar <= b.y_hi);
        CHECK(pts[i].t == pts2[i].t);
    }
    auto pts3 = sample_domain(b, 500, 12);
    bool differ = false;
    for (std::size_t i = 0; i < pts.size(); ++i) differ = differ || pts[i].t != pts3[i].t;
    CHECK(differ);
}

TEST_CASE("low-discrepancy samples cover the range without large gaps") {
    SampleBounds b;  // defaults: t in [0,1], x in [-5,5]
    auto pts = sample_domain(b, 1000, 3);
    std::vector<double> ts(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) ts[i] = pts[i].t;
    std::sort(ts.begin(), ts.end());
    double max_gap = std::max(ts.front(), 1.0 - ts.back());
    for (std::size_t i = 1; i < ts.size(); ++i) max_gap = std::max(max_gap, ts[i] - ts[i - 1]);
    // Halton base 2 with 1000 points has gaps near 1/1000; 0.01 is generous.
    CHECK(max_gap < 0.01);
}

TEST_CASE("degenerate sampling requests are rejected") {
    SampleBounds b;
    CHECK_THROWS_AS(sample_domain(b, 0, 1), std::invalid_argument);
    b.x_lo = 1.0;
    b.x_hi = -1.0;
    CHECK_THROWS_AS(sample_domain(b, 10, 1), std::invalid_argument);
}
