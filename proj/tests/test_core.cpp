#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "oag/invariants.hpp"

using namespace oag;
using namespace oagtest;

TEST_CASE("extended naturals saturate instead of overflowing semantics") {
    ExtNat inf = ExtNat::infinity();
    CHECK(ExtNat(3) + inf == inf);
    CHECK(inf * ExtNat(2) == inf);
    CHECK(ExtNat(0) * inf == ExtNat(0));  // a zero dimension annihilates
    CHECK(ExtNat(5) < inf);
    CHECK_FALSE(inf < inf);
    CHECK(ExtNat(7).str() == "7");
    CHECK(inf.str() == "inf");
}

TEST_CASE("rationals are normalized and compare exactly") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(3, -6) == Rational(-1, 2));
    CHECK(Rational(-7, 2).floor() == -4);
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(1, 3) < Rational(2, 5));
    CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("prime helpers") {
    CHECK(is_prime(2));
    CHECK(is_prime(97));
    CHECK_FALSE(is_prime(1));
    CHECK_FALSE(is_prime(91));
    CHECK(prime_factors(12) == std::vector<long long>{2, 3});
    CHECK(prime_factors(-30) == std::vector<long long>{2, 3, 5});
}

TEST_CASE("component realization constraints are enforced") {
    // Z must be discrete with dim 1 at every prime.
    CHECK_THROWS_AS(spec("component a: dims{} default 1 realize Z\n"), parse_error);
    CHECK_THROWS_AS(spec("component a: dims{2:0} default 1 discrete realize Z\n"), parse_error);
    // Q is divisible: all dimensions must vanish and the order is dense.
    CHECK_THROWS_AS(spec("component a: dims{2:1} default 0 realize Q\n"), parse_error);
    CHECK_THROWS_AS(spec("component a: dims{} default 0 discrete realize Q\n"), parse_error);
    // Z_inv{p}: dimension 0 exactly at the inverted primes.
    CHECK_THROWS_AS(spec("component a: dims{} default 1 realize Z_inv{2}\n"), parse_error);
    CHECK_THROWS_AS(spec("component a: dims{2:0,3:0} default 1 realize Z_inv{2}\n"),
                    parse_error);
    CHECK_NOTHROW(spec("component a: dims{2:0} default 1 realize Z_inv{2}\n"));
}

TEST_CASE("per-prime dimensions of lex products add up") {
    GroupSpec zz = zz_spec();
    CHECK(dim_p(zz, 2) == ExtNat(2));
    CHECK(dim_p(zz, 5) == ExtNat(2));

    GroupSpec zinv2 = spec("component a: dims{2:0} default 1 realize Z_inv{2}\n");
    CHECK(dim_p(zinv2, 2) == ExtNat(0));
    CHECK(dim_p(zinv2, 3) == ExtNat(1));

    GroupSpec inf2 = spec("component a: dims{2:inf} default 0\n");
    CHECK(dim_p(inf2, 2) == ExtNat::infinity());
    CHECK(dim_p(inf2, 3) == ExtNat(0));
}

// Re-derivation of the jump chain from first principles: an element with
// leading coordinate i maps to the smallest tail CS(m) such that all the
// components strictly between i and m are p-divisible.
static std::vector<std::size_t> jump_levels_by_hand(const GroupSpec& g, long long p) {
    std::set<std::size_t> levels;
    for (std::size_t i = 1; i <= g.rank(); ++i) {
        std::size_t m = i;
        while (m < g.rank() && g.component(m).dim_p(p) == ExtNat(0)) ++m;
        levels.insert(m);  // CS(rank) = {0} shows up when the run reaches the bottom
    }
    return {levels.begin(), levels.end()};
}

TEST_CASE("regular jumps match the hand derivation on small products") {
    for (const GroupSpec& g : {z_spec(), zz_spec(), zqz_spec()}) {
        for (long long p : {2ll, 3ll, 5ll}) {
            auto jumps = regular_jumps(g, p);
            std::vector<std::size_t> got;
            for (const auto& d : jumps) got.push_back(d.level());
            std::sort(got.begin(), got.end());
            std::vector<std::size_t> want = jump_levels_by_hand(g, p);
            // The chain always ends in the zero subgroup CS(rank) when some
            // component is not p-divisible at the bottom.
            CHECK(got == want);
        }
    }
}

TEST_CASE("jump chains are returned as inclusion-ascending chains") {
    GroupSpec g = zqz_spec();
    auto jumps = regular_jumps(g, 2);
    for (std::size_t i = 1; i < jumps.size(); ++i) CHECK(jumps[i - 1] <= jumps[i]);
}

TEST_CASE("classification of the standard examples") {
    auto cls = [](const GroupSpec& g) { return classify(g); };

    CHECK(cls(GroupSpec()).kind == GroupKind::trivial);
    CHECK(cls(GroupSpec()).dp_rank == ExtNat(0));

    CHECK(cls(z_spec()).kind == GroupKind::dp_minimal);
    CHECK(cls(z_spec()).dp_rank == ExtNat(1));
    CHECK(cls(q_spec()).dp_rank == ExtNat(1));
    CHECK(cls(zz_spec()).dp_rank == ExtNat(1));
    CHECK(cls(zqz_spec()).dp_rank == ExtNat(1));

    GroupSpec inf2 = spec("component a: dims{2:inf} default 0\n");
    CHECK(cls(inf2).kind == GroupKind::strong);
    CHECK(cls(inf2).dp_rank == ExtNat(2));

    GroupSpec inf23 = spec("component a: dims{2:inf,3:inf} default 0\n");
    CHECK(cls(inf23).dp_rank == ExtNat(3));

    GroupSpec inf_default = spec("component a: dims{} default inf\n");
    CHECK(cls(inf_default).kind == GroupKind::not_strong);
    CHECK(cls(inf_default).dp_rank == ExtNat::infinity());

    GroupSpec tower = spec(
        "component top: dims{} default 1 discrete realize Z\n"
        "omega_tower: dims{} default 1 discrete\n");
    CHECK(cls(tower).kind == GroupKind::not_strong);

    GroupSpec div_tower = spec(
        "component top: dims{} default 0 realize Q\n"
        "omega_tower: dims{} default 0\n");
    CHECK(cls(div_tower).kind == GroupKind::dp_minimal);
}

TEST_CASE("dp-rank equals one plus the infinite-jump count, prime by prime") {
    for (const char* text : {
             "component a: dims{2:inf} default 0\n",
             "component a: dims{2:inf} default 0\ncomponent b: dims{3:inf} default 0\n",
             "component a: dims{2:inf,3:inf} default 0\ncomponent b: dims{} default 1 discrete realize Z\n",
         }) {
        GroupSpec g = spec(text);
        ExtNat total(1);
        for (long long p : g.relevant_primes()) total += ExtNat(infinite_jumps(g, p).size());
        CHECK(dp_rank(g) == total);
    }
}

TEST_CASE("the directed-family count agrees with dp-rank on strong groups") {
    for (const char* text : {
             "component a: dims{} default 1 discrete realize Z\n",
             "component a: dims{2:inf} default 0\n",
             "component a: dims{2:inf,3:inf} default 0\n",
         }) {
        GroupSpec g = spec(text);
        CHECK(vca_number(g) == dp_rank(g));
    }
}

TEST_CASE("archimedean class operators on lex coordinates") {
    GroupSpec g = zz_spec();
    GroupElement x = el(g, {0, 3});
    GroupElement y = el(g, {1, 0});
    CHECK(A_of(g, x)->level() == 2);
    CHECK(B_of(g, x)->level() == 1);
    CHECK(A_of(g, y)->level() == 1);
    CHECK(B_of(g, y)->level() == 0);
    CHECK_FALSE(A_of(g, GroupElement::zero(g)).has_value());

    // lex order sanity
    CHECK(compare(el(g, {0, 5}), el(g, {1, -100})) < 0);
    CHECK(compare(el(g, {2, -1}), el(g, {2, -1})) == 0);
}
