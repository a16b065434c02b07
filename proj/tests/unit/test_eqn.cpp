#include <doctest.h>

#include "mptbf/eqn.hpp"

#include <string>

using namespace mptbf;

TEST_CASE("single record") {
    const auto m = parse_eqn("pair E1 c*r");
    REQUIRE(m.trees().size() == 1);
    CHECK(m.trees()[0].id == "pair");
    CHECK(m.trees()[0].categories == std::vector<std::string>{"E1"});
    REQUIRE(m.trees()[0].branches.size() == 1);
    const auto& b = m.trees()[0].branches[0];
    CHECK(b.category == "E1");
    CHECK(b.factors == std::vector<Factor>{{"c", Polarity::Direct}, {"r", Polarity::Direct}});
}

TEST_CASE("duplicate branches add up") {
    const auto m = parse_eqn("pair E1 c*r\npair E1 c*r\n");
    CHECK(m.trees()[0].branches.size() == 2);
    const auto p = m.probability_map(std::vector<double>{0.5, 0.4});
    CHECK(p.at("E1") == doctest::Approx(0.4));
}

TEST_CASE("strict mode rejects undeclared parameters") {
    EqnOptions strict;
    strict.declared_parameters = std::set<std::string>{"c", "r"};
    CHECK_NOTHROW(parse_eqn("pair E1 c*r", strict));
    CHECK_THROWS_AS(parse_eqn("pair E1 q*r", strict), ParseError);
    try {
        parse_eqn("pair E1 c*r\npair E2 q*r", strict);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("legacy count line, comments and blank lines") {
    const std::string text = "# header comment\n\n3\nt a x   # trailing\nt b (1-x)*y\nt b (1-x)*(1-y)\n";
    const auto m = parse_eqn(text);
    CHECK(m.free_parameters() == std::vector<std::string>{"x", "y"});
    CHECK(m.validate().empty());
    // Without the count line the result is the same.
    const auto n = parse_eqn("t a x\nt b (1-x)*y\nt b (1-x)*(1-y)\n");
    CHECK(n.free_parameters() == m.free_parameters());
    CHECK(n.num_categories() == m.num_categories());
}

TEST_CASE("CRLF line endings") {
    const auto m = parse_eqn("t a x\r\nt b (1-x)\r\n");
    CHECK(m.num_categories() == 2);
    CHECK(m.validate().empty());
}

TEST_CASE("numeric constants become fixed parameters") {
    const auto m = parse_eqn("t a x*0.5\nt b x*0.5\nt c (1-x)\n");
    CHECK(m.free_parameters() == std::vector<std::string>{"x"});
    const auto p = m.probability_map(std::vector<double>{0.8});
    CHECK(p.at("a") == doctest::Approx(0.4));
    CHECK(m.validate().empty());
    CHECK_THROWS(parse_eqn("t a x*1.5\nt b (1-x)\n"));
}

TEST_CASE("names are case-sensitive") {
    const auto m = parse_eqn("t a x\nt b (1-X)\n");
    CHECK(m.free_parameters() == std::vector<std::string>{"x", "X"});
}

TEST_CASE("syntax errors carry line numbers") {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse_eqn(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("t a x\nt b\n") == 2);            // missing term
    CHECK(line_of("t a x\nt b (1-x\n") == 2);       // unbalanced complement
    CHECK(line_of("t a x\nt b x**y\n") == 2);       // empty factor
    CHECK(line_of("t a x\n\nt b 1x\n") == 3);       // bad identifier
    CHECK(line_of("t a x\nt b (1 - x)\n") == 0);    // spaces inside a term are allowed
    CHECK_THROWS_AS(parse_eqn(""), ParseError);
    CHECK_THROWS_AS(parse_eqn("# only a comment\n"), ParseError);
}
