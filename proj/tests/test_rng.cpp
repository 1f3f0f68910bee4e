#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mfg/rng.hpp"

using namespace mfg;

TEST_CASE("philox reference block for zero key and counter") {
    // Published 4x32-10 test vector: counter 0, key 0.
    Philox rng(0, 0);
    CHECK(rng() == 0x6627e8d5u);
    CHECK(rng() == 0xe169c58du);
    CHECK(rng() == 0xbc57ac4cu);
    CHECK(rng() == 0x9b00dbd8u);
}

TEST_CASE("philox streams are deterministic and disjoint") {
    Philox a(42, 1), b(42, 1), c(42, 2);
    bool same = true, differ = false;
    for (int i = 0; i < 64; ++i) {
        const auto x = a(), y = b(), z = c();
        same = same && x == y;
        differ = differ || x != z;
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("uniform draws stay in (0, 1]") {
    Philox rng(7, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u > 0.0);
        REQUIRE(u <= 1.0);
    }
}

TEST_CASE("normal draws have the right first two moments") {
    Philox rng(2718, 5);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}
