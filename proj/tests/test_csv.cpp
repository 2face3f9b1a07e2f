#include <doctest.h>

#include <sstream>

#include "leakaudit/csv.hpp"

using namespace leakaudit;

TEST_CASE("quoted fields, escaped quotes and embedded newlines") {
    std::istringstream in("a,b,c\r\n1,\"x, y\",\"say \"\"hi\"\"\"\n2,\"multi\nline\",\n");
    const auto t = csv::parse(in);
    REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x, y");
    CHECK(t.rows[0][2] == "say \"hi\"");
    CHECK(t.rows[1][1] == "multi\nline");
    CHECK(t.rows[1][2] == "");
    CHECK(t.find("c") == 2);
    CHECK_FALSE(t.find("d").has_value());
}

TEST_CASE("header-only file has no rows; short rows are padded") {
    std::istringstream a("x,y\n");
    CHECK(csv::parse(a).rows.empty());
    std::istringstream b("x,y\n1\n");
    const auto t = csv::parse(b);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0] == std::vector<std::string>{"1", ""});
}

TEST_CASE("malformed input is rejected") {
    std::istringstream long_row("x,y\n1,2,3\n");
    CHECK_THROWS(csv::parse(long_row));
    std::istringstream open_quote("x\n\"abc\n");
    CHECK_THROWS(csv::parse(open_quote));
}

TEST_CASE("escape round-trips through parse") {
    const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "", "line\nbreak"};
    std::ostringstream out;
    csv::write_row(out, {"h1", "h2", "h3", "h4", "h5"});
    csv::write_row(out, fields);
    std::istringstream in(out.str());
    const auto t = csv::parse(in);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0] == fields);
}

TEST_CASE("numeric cells") {
    CHECK(csv::to_double("1.5") == 1.5);
    CHECK(csv::to_double(" -2 ") == -2.0);
    CHECK(csv::to_double("+3") == 3.0);
    CHECK_FALSE(csv::to_double("").has_value());
    CHECK_FALSE(csv::to_double("abc").has_value());
    CHECK_FALSE(csv::to_double("1.5x").has_value());
    CHECK_FALSE(csv::to_double("nan").has_value());
}
