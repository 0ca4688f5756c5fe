#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "oag/oracle.hpp"

using namespace oag;
using namespace oagtest;

TEST_CASE("linear term algebra") {
    LinearTerm t = LinearTerm::variable("x", 2) + LinearTerm::variable("y", -1);
    CHECK(t.coeff_of("x") == 2);
    CHECK(t.coeff_of("z") == 0);
    CHECK((t - t).is_zero());
    CHECK(t.substituted("y", LinearTerm::variable("x")).coeff_of("x") == 1);
    CHECK(t.without_variable("x").coeff_of("x") == 0);

    GroupSpec g = zz_spec();
    std::map<std::string, GroupElement> asg{{"x", el(g, {1, 2})}, {"y", el(g, {0, 3})}};
    CHECK(t.evaluate(g, asg) == el(g, {2, 1}));

    // one@l is the unit of a discrete coordinate.
    CHECK(LinearTerm::one_at(1).evaluate(g, {}) == el(g, {1, 0}));
    GroupSpec q = q_spec();
    CHECK_THROWS_AS(LinearTerm::one_at(1).evaluate(q, {}), domain_error);
}

TEST_CASE("parse and print round-trip on hand-written formulas") {
    GroupSpec g = zz_spec();
    for (const char* text : {
             "x <= y",
             "y < x and x == 0 mod 2G",
             "not (x = y or x < y)",
             "exists x. y < x and x == (1,0) mod stair[D1, 3*G]",
             "forall y. exists x. y < x",
             "2*x + y <= z + (1,-4)",
             "x == y mod D1",
         }) {
        FormulaPtr f = parse_formula(text, g);
        FormulaPtr again = parse_formula(print(f), g);
        CHECK(structurally_equal(f, again));
    }
}

TEST_CASE("parse errors carry an offset") {
    GroupSpec g = zz_spec();
    CHECK_THROWS_AS(parse_formula("x <=", g), parse_error);
    CHECK_THROWS_AS(parse_formula("x == y mod", g), parse_error);
    CHECK_THROWS_AS(parse_formula("(1,2,3) < x", g), parse_error);  // arity mismatch
    try {
        parse_formula("x << y", g);
        CHECK(false);
    } catch (const parse_error& e) {
        CHECK(e.offset > 0);
    }
}

TEST_CASE("round-trip on generated formulas") {
    std::mt19937_64 rng(5);
    for (const GroupSpec& g : {zz_spec(), zqz_spec()}) {
        for (int t = 0; t < 200; ++t) {
            FormulaPtr f = random_qf_formula(g, rng, {"x", "y"}, 4);
            CHECK(structurally_equal(f, parse_formula(print(f), g)));
        }
    }
}

TEST_CASE("evaluation agrees with the independent evaluator") {
    std::mt19937_64 rng(17);
    for (const GroupSpec& g : {zz_spec(), zqz_spec()}) {
        for (int t = 0; t < 300; ++t) {
            FormulaPtr f = random_qf_formula(g, rng, {"x", "y"}, 4);
            std::map<std::string, GroupElement> asg{{"x", random_element(g, rng, 20)},
                                                    {"y", random_element(g, rng, 20)}};
            CHECK(evaluate(f, g, asg) == oracle_evaluate(f, g, asg));
        }
    }
}

TEST_CASE("quantifier-free truth on simple atoms") {
    GroupSpec g = zz_spec();
    std::map<std::string, GroupElement> asg{{"x", el(g, {2, 1})}};
    CHECK(evaluate(parse_formula("x == 0 mod 2G", g), g, asg) == false);
    CHECK(evaluate(parse_formula("x == (0,1) mod 2G", g), g, asg));
    CHECK(evaluate(parse_formula("x < (2,2)", g), g, asg));
    CHECK(evaluate(parse_formula("(2,1) <= x", g), g, asg));
}

TEST_CASE("derived atoms expand to equivalent base formulas") {
    std::mt19937_64 rng(23);
    GroupSpec g = zz_spec();
    Box box{Rational(-8), Rational(8), 1};
    for (int t = 0; t < 100; ++t) {
        GroupElement x = random_element(g, rng, 8);
        long long n = 2 + (long long)(rng() % 5);
        long long kk = 1 + (long long)(rng() % 3);
        std::size_t level = rng() % (g.rank() + 1);
        LinearTerm tm = LinearTerm::variable("x");
        std::vector<FormulaPtr> atoms = {
            Formula::make_an_eq(n, tm, level),
            Formula::make_fn_eq(n, tm, level),
            Formula::make_m_k(kk, tm),
            Formula::make_e_nk(n, kk, tm),
        };
        for (long long p : {2ll, 3ll})
            atoms.push_back(Formula::make_d_pri(p, 2 + (long long)(rng() % 2), 1, tm));
        for (const auto& atom : atoms) {
            FormulaPtr expanded = expand_derived(atom, g);
            CHECK_FALSE(has_derived_atoms(expanded));
            std::map<std::string, GroupElement> asg{{"x", x}};
            // Direct semantics (core-algebra operators) versus the expansion.
            CHECK(evaluate(atom, g, asg) == evaluate(expanded, g, asg));
        }
    }
}

TEST_CASE("composite moduli split into prime-power congruences") {
    GroupSpec g = zz_spec();
    FormulaPtr f = parse_formula("x == y mod 6G", g);
    FormulaPtr split = expand_composite_modulus(f);
    std::mt19937_64 rng(31);
    for (int t = 0; t < 100; ++t) {
        std::map<std::string, GroupElement> asg{{"x", random_element(g, rng, 18)},
                                                {"y", random_element(g, rng, 18)}};
        CHECK(evaluate(f, g, asg) == evaluate(split, g, asg));
    }
}

TEST_CASE("free variables and substitution") {
    GroupSpec g = zz_spec();
    FormulaPtr f = parse_formula("exists x. y < x and x < z", g);
    auto fv = free_variables(f);
    CHECK(std::set<std::string>(fv.begin(), fv.end()) == std::set<std::string>{"y", "z"});

    FormulaPtr sub = substitute(f, "y", LinearTerm::constant(el(g, {0, 0})));
    fv = free_variables(sub);
    CHECK(std::set<std::string>(fv.begin(), fv.end()) == std::set<std::string>{"z"});
}
