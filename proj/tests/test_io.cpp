#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "mfg/io.hpp"

using namespace mfg;

TEST_CASE("csv quoting follows rfc 4180") {
    CHECK(csv_quote("plain") == "plain");
    CHECK(csv_quote("has,comma") == "\"has,comma\"");
    CHECK(csv_quote("has\"quote") == "\"has\"\"quote\"");
    CHECK(csv_quote("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("csv writer emits metadata comment, header, and rows") {
    std::ostringstream os;
    CsvWriter w(os);
    w.comment({{"scenario", "zero"}, {"seed", "42"}});
    w.row({"t", "value"});
    w.row({csv_field(0.1), csv_field(-2.5)});
    const std::string out = os.str();
    CHECK(out.rfind("# scenario=zero seed=42\n", 0) == 0);
    CHECK(out.find("t,value\n") != std::string::npos);
    CHECK(out.find("0.10000000000000001,-2.5\n") != std::string::npos);
}

TEST_CASE("csv numeric fields round-trip doubles") {
    for (double v : {1.0 / 3.0, 6.02214076e23, -1e-12}) CHECK(std::stod(csv_field(v)) == v);
}

TEST_CASE("json files are written with sorted keys") {
    nlohmann::json j;
    j["zebra"] = 1;
    j["alpha"] = 2;
    const std::string dumped = j.dump();
    CHECK(dumped.find("alpha") < dumped.find("zebra"));
}
