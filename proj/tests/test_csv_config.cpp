#include <doctest.h>

#include <sstream>

#include "scrisk/config.hpp"
#include "scrisk/csv.hpp"
#include "scrisk/error.hpp"
#include "scrisk/month.hpp"

using namespace scrisk;

TEST_CASE("csv reader parses quoted fields and reports line numbers") {
    std::istringstream in("a,b\n1,\"x,\"\"y\"\"\"\n2,plain\n\n3,tail\n");
    CsvReader reader(in, "t.csv", {"a", "b"});
    std::vector<std::string> row;
    REQUIRE(reader.next(row));
    CHECK(row[0] == "1");
    CHECK(row[1] == "x,\"y\"");
    REQUIRE(reader.next(row));
    CHECK(row[1] == "plain");
    REQUIRE(reader.next(row));
    CHECK(row[0] == "3");
    CHECK(!reader.next(row));
}

TEST_CASE("csv reader rejects malformed input with position") {
    SUBCASE("wrong field count names the line") {
        std::istringstream in("a,b\n1,2\nonly-one\n");
        CsvReader reader(in, "bad.csv", {"a", "b"});
        std::vector<std::string> row;
        REQUIRE(reader.next(row));
        CHECK_THROWS_WITH_AS(reader.next(row), doctest::Contains("bad.csv:3"), ValidationError);
    }
    SUBCASE("header mismatch") {
        std::istringstream in("a,z\n");
        CHECK_THROWS_AS(CsvReader(in, "bad.csv", {"a", "b"}), ValidationError);
    }
    SUBCASE("missing header") {
        std::istringstream in("");
        CHECK_THROWS_AS(CsvReader(in, "bad.csv", {"a"}), ValidationError);
    }
}

TEST_CASE("csv writer round-trips awkward fields") {
    std::ostringstream os;
    {
        CsvWriter writer(os, {"x", "y"});
        writer.row({"comma,here", "quote\"and\nnewline"});
    }
    std::istringstream in(os.str());
    CsvReader reader(in, "rt.csv", {"x", "y"});
    std::vector<std::string> row;
    REQUIRE(reader.next(row));
    CHECK(row[0] == "comma,here");
    CHECK(row[1] == "quote\"and\nnewline");
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.6789, -0.0, 7.0}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("month parsing") {
    CHECK(Month::parse("2019-05").str() == "2019-05");
    CHECK(Month::parse("2019-05") < Month::parse("2019-06"));
    CHECK(Month::parse("2019-12").plus(1) == Month::parse("2020-01"));
    CHECK_THROWS_AS(Month::parse("2019-13"), ValidationError);
    CHECK_THROWS_AS(Month::parse("2019/05"), ValidationError);
    CHECK_THROWS_AS(Month::parse("19-05"), ValidationError);
}

TEST_CASE("run config parsing") {
    SUBCASE("keys apply and comments are ignored") {
        std::istringstream in(
            "# comment\n"
            "synth.n_entities = 12   # trailing comment\n"
            "eval.lr_grid = 0.1, 0.2\n"
            "synth.sector_mix = A:0.5, B:0.5\n"
            "eval.tune_per_trial = true\n");
        const RunConfig config = parse_run_config(in, "cfg");
        CHECK(config.synth.n_entities == 12);
        CHECK(config.lr_grid == std::vector<double>{0.1, 0.2});
        CHECK(config.synth.sector_mix.size() == 2);
        CHECK(config.tune_per_trial);
    }
    SUBCASE("unknown keys are rejected") {
        std::istringstream in("synth.n_entties = 12\n");
        CHECK_THROWS_WITH_AS(parse_run_config(in, "cfg"), doctest::Contains("unknown config key"),
                             ValidationError);
    }
    SUBCASE("bad values are rejected") {
        std::istringstream in("synth.n_entities = twelve\n");
        CHECK_THROWS_AS(parse_run_config(in, "cfg"), ValidationError);
    }
    SUBCASE("grid nesting order is lr, trees, depth, l1") {
        std::istringstream in("eval.lr_grid = 0.1,0.2\neval.trees_grid = 10\n"
                              "eval.depth_grid = 2\neval.l1_grid = 0,1\n");
        const RunConfig config = parse_run_config(in, "cfg");
        const auto grid = config.grid();
        REQUIRE(grid.size() == 4);
        CHECK(grid[0].learning_rate == 0.1);
        CHECK(grid[0].l1_reg == 0.0);
        CHECK(grid[1].learning_rate == 0.1);
        CHECK(grid[1].l1_reg == 1.0);
        CHECK(grid[2].learning_rate == 0.2);
    }
}
