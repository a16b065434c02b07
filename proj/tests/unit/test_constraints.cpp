#include <doctest.h>

#include "mptbf/constraints.hpp"
#include "mptbf/eqn.hpp"

using namespace mptbf;

namespace {

const char* kModel =
    "pairs E1 c*r\n"
    "pairs E2 (1-c)*u*u\n"
    "pairs E3 (1-c)*u*(1-u)\n"
    "pairs E3 (1-c)*(1-u)*u\n"
    "pairs E4 c*(1-r)\n"
    "pairs E4 (1-c)*(1-u)*(1-u)\n"
    "singles F1 u\n"
    "singles F2 (1-u)\n"
    "pairs2 G1 d*r2\n"
    "pairs2 G2 d*(1-r2)\n"
    "pairs2 G3 (1-d)\n";

}  // namespace

TEST_CASE("directives") {
    const auto cs = parse_constraints(
        "# comment\n"
        "order(A): c < d\n"
        "order(b): r <= r2   # trailing\n"
        "\n"
        "prior: u Beta(2, 3.5)\n"
        "alias: r2 = r\n"
        "fixed: u = 0.25\n");
    REQUIRE(cs.chains.size() == 2);
    CHECK(cs.chains[0] == OrderChain({"c", "d"}, Method::A));
    CHECK(cs.chains[1] == OrderChain({"r", "r2"}, Method::B));
    CHECK(cs.priors.at("u") == BetaShape{2.0, 3.5});
    CHECK(cs.aliases.at("r2") == "r");
    CHECK(cs.fixed.at("u") == 0.25);
}

TEST_CASE("directive errors carry the line") {
    auto line_of = [](const char* text) -> std::size_t {
        try {
            parse_constraints(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("order(A): a < b\norder(C): a < b\n") == 2);
    CHECK(line_of("order(A): a < a\n") == 1);
    CHECK(line_of("order(A): a < \n") == 1);
    CHECK(line_of("\nprior: a Beta(0, 1)\n") == 2);
    CHECK(line_of("prior: a Beta(x, 1)\n") == 1);
    CHECK(line_of("fixed: a = 2\n") == 1);
    CHECK(line_of("something else\n") == 1);
    CHECK(line_of("alias: a = b\nalias: a = c\n") == 2);
}

TEST_CASE("chain validation") {
    const auto m = parse_eqn(kModel);
    CHECK(validate_chains(m, {OrderChain({"c", "d"}), OrderChain({"r", "r2"})}).empty());
    CHECK(validate_chains(m, {OrderChain({"c", "q"})}).size() == 1);
    CHECK(validate_chains(m, {OrderChain({"c", "d"}), OrderChain({"d", "u"})}).size() == 1);

    const auto fixed = m.with_roles({{"d", FixedRole{0.5}}});
    CHECK(validate_chains(fixed, {OrderChain({"c", "d"})}).size() == 1);
}

TEST_CASE("custom priors are validated") {
    const auto m = parse_eqn(kModel);
    ConstraintSet cs;
    cs.chains = {OrderChain({"c", "d"})};
    cs.priors["u"] = {2, 2};
    CHECK(validate_constraints(m, cs).empty());
    cs.priors["c"] = {2, 2};
    CHECK(validate_constraints(m, cs).size() == 1);
    cs.priors.erase("c");
    cs.priors["zz"] = {1, 1};
    CHECK(validate_constraints(m, cs).size() == 1);
}

TEST_CASE("roles and collapse") {
    const auto m = parse_eqn(kModel);
    ConstraintSet cs;
    cs.aliases["r2"] = "r";
    cs.fixed["u"] = 0.5;
    const auto applied = apply_roles(m, cs);
    CHECK(applied.free_parameters() == std::vector<std::string>{"c", "r", "d"});
    const auto p = applied.probability_map(std::vector<double>{0.5, 0.5, 0.5});
    CHECK(p.at("F1") == doctest::Approx(0.5));

    const auto collapsed = collapse_chains(m, {OrderChain({"c", "d"})});
    CHECK(collapsed.free_parameters() == std::vector<std::string>{"c", "r", "u", "r2"});
    const auto q = collapsed.probability_map(std::vector<double>{0.3, 0.5, 0.5, 0.5});
    CHECK(q.at("G3") == doctest::Approx(0.7));
}
