#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mfg/spec.hpp"

using namespace mfg;

namespace {
const char* kLqConfig = R"({
  "kind": "lq",
  "A": 1.0, "B": 1.0, "Q": 1.0, "R": 1.0, "F": 0.5, "G": 1.0,
  "sigma": [0.2], "sigma0": [0.2],
  "h": {"type": "tanh", "amp": 0.2},
  "b": {"type": "tanh", "amp": -0.1},
  "K": 2.0, "eps0": 0.5
})";
}

TEST_CASE("lq config parses and round-trips") {
    TimeGrid grid(1.0, 100);
    auto spec = load_spec(kLqConfig, grid);
    REQUIRE(std::holds_alternative<LQSpec>(spec));
    const LQSpec& lq = std::get<LQSpec>(spec);
    CHECK(lq.A(0.3) == 1.0);
    CHECK(lq.h(0.0, 0.5) == Catch::Approx(0.2 * std::tanh(0.5)));

    const json echo = lq_to_json(lq);
    const LQSpec lq2 = lq_from_json(echo, grid, SampleBounds{});
    CHECK(lq_to_json(lq2) == echo);
}

TEST_CASE("unknown keys are parse errors") {
    TimeGrid grid(1.0, 100);
    CHECK_THROWS_AS(load_spec(R"({"kind": "lq", "bogus": 1})", grid), ParseError);
    CHECK_THROWS_AS(load_spec(R"({"kind": "martingale"})", grid), ParseError);
    CHECK_THROWS_AS(load_spec("not json at all", grid), ParseError);
}

TEST_CASE("standing-assumption violations are named") {
    TimeGrid grid(1.0, 100);

    LQSpec bad_r;
    bad_r.R = ScalarCoefficient::constant(-1.0);
    auto errs = validate_lq(bad_r, grid, SampleBounds{});
    REQUIRE_FALSE(errs.empty());
    CHECK(errs.front().find("R(t) > 0") != std::string::npos);

    LQSpec bad_qf;
    bad_qf.Q = ScalarCoefficient::constant(0.1);
    bad_qf.F = ScalarCoefficient::constant(1.0);
    bad_qf.R = ScalarCoefficient::constant(1.0);
    errs = validate_lq(bad_qf, grid, SampleBounds{});
    bool found = false;
    for (const auto& e : errs) found = found || e.find("F(t)^2/R(t)") != std::string::npos;
    CHECK(found);

    LQSpec bad_b3;
    bad_b3.h = NonlinearMap::linear(-1.0);
    errs = validate_lq(bad_b3, grid, SampleBounds{});
    found = false;
    for (const auto& e : errs) found = found || e.find("(B3)") != std::string::npos;
    CHECK(found);
}

TEST_CASE("general config parses with separable nonlinear terms") {
    TimeGrid grid(1.0, 100);
    auto spec = load_spec(R"({
      "kind": "general", "b1": 0.5, "b2": -0.2, "f1": 1.0, "f2": 0.5,
      "h1": 1.0, "b0x": {"type": "sin", "amp": 0.3},
      "b0y": {"type": "linear", "c": 0.1}, "h2": {"type": "tanh", "amp": 0.2},
      "K": 2.0
    })", grid);
    REQUIRE(std::holds_alternative<GeneralSpec>(spec));
    const GeneralSpec& gs = std::get<GeneralSpec>(spec);
    CHECK(gs.n == 1);
    CHECK(gs.b1(0.0) == 0.5);
    CHECK(gs.b0(0.0, 1.0, Vec{2.0}) == Catch::Approx(0.3 * std::sin(1.0) + 0.2));
    CHECK(gs.h2(0.5)[0] == Catch::Approx(0.2 * std::tanh(0.5)));
    CHECK(gs.degenerate_common_noise(0.5));
}

TEST_CASE("sim config validation") {
    SimConfig sim;
    CHECK_NOTHROW(sim.validate());
    sim.dnu = -1.0;
    CHECK_THROWS_AS(sim.validate(), ValidationError);
}
