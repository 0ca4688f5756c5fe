#pragma once

#include <utility>
#include <vector>

#include "oag/group.hpp"

namespace oag {

// A definable subgroup of the form  Δ1 + m1·Δ2 + ... + m_{t-1}·Δt + mt·G
// with convex Δ1 ⊂ Δ2 ⊂ ... ⊂ Δt. Since each summand m·CS(l) constrains
// coordinates independently, every such subgroup is a product of
// per-coordinate subgroups eff(c)·A_c; we store the vector of effective
// moduli, reduced per component (primes p with dim_p = 0 stripped), with
// eff(c) = 0 meaning the coordinate is forced to vanish. Zeros form a
// most-significant prefix and the reduced vector is a complete invariant,
// so equality, sum, intersection, containment and index are all
// coordinatewise.
class StaircaseSubgroup {
public:
    // One summand: multiplier * CS(level); a level of 0 denotes the whole
    // group (the tail term). The first summand's multiplier is convention-
    // ally 1 but arbitrary positive multipliers are accepted and
    // canonicalized.
    struct Term {
        long long multiplier;
        std::size_t level;
    };

    // The zero subgroup {0}.
    static StaircaseSubgroup zero(const GroupSpec& g);
    // The whole group (n = 1) or n·G.
    static StaircaseSubgroup multiple_of_group(const GroupSpec& g, long long n);
    // A convex subgroup D_level.
    static StaircaseSubgroup convex(const GroupSpec& g, const ConvexSubgroup& d);
    // D_level + n·G.
    static StaircaseSubgroup convex_plus(const GroupSpec& g, const ConvexSubgroup& d, long long n);
    // General sum of terms; tail_modulus = 0 means no ambient n·G summand.
    static StaircaseSubgroup from_terms(const GroupSpec& g, const std::vector<Term>& terms,
                                        long long tail_modulus);
    // Directly from a per-coordinate effective-modulus vector (canonicalized).
    static StaircaseSubgroup from_effective_moduli(const GroupSpec& g,
                                                   std::vector<long long> eff);

    const GroupSpec& group() const { return *group_; }
    std::size_t rank() const { return eff_.size(); }
    // Effective modulus at 1-based coordinate c (0 = forced zero).
    long long eff(std::size_t c) const { return eff_.at(c - 1); }

    bool is_whole_group() const;
    bool is_zero() const;
    // True when eff is 0/1-valued, i.e. the subgroup is some D_level.
    bool is_convex() const;
    // Largest level l with coordinates 1..l forced to zero.
    std::size_t zero_prefix() const;

    // Canonical term list (strictly decreasing levels, divisibility-chain
    // multipliers, first multiplier 1) plus tail modulus; used for printing.
    std::pair<std::vector<Term>, long long> canonical_terms() const;
    std::string str() const;

    bool operator==(const StaircaseSubgroup& o) const;
    bool operator!=(const StaircaseSubgroup& o) const { return !(*this == o); }

private:
    StaircaseSubgroup(const GroupSpec& g, std::vector<long long> eff);

    const GroupSpec* group_ = nullptr;
    std::vector<long long> eff_;

    friend StaircaseSubgroup sum(const StaircaseSubgroup&, const StaircaseSubgroup&);
    friend StaircaseSubgroup intersect(const StaircaseSubgroup&, const StaircaseSubgroup&);
    friend StaircaseSubgroup scale(long long, const StaircaseSubgroup&);
    friend StaircaseSubgroup prefix_restriction(const StaircaseSubgroup&, std::size_t);
};

StaircaseSubgroup sum(const StaircaseSubgroup& a, const StaircaseSubgroup& b);
StaircaseSubgroup intersect(const StaircaseSubgroup& a, const StaircaseSubgroup& b);
// n·H for n != 0.
StaircaseSubgroup scale(long long n, const StaircaseSubgroup& h);
// H with all constraints below coordinate c dropped (coordinates > c free);
// used to talk about the most significant part of a congruence.
StaircaseSubgroup prefix_restriction(const StaircaseSubgroup& h, std::size_t c);

// Membership of an element (computable specs only).
bool contains(const StaircaseSubgroup& h, const GroupElement& x);
// small ⊆ big, decided from the dimension profiles.
bool contains_subgroup(const StaircaseSubgroup& big, const StaircaseSubgroup& small);
// [big : small]; domain error unless small ⊆ big.
ExtNat index(const StaircaseSubgroup& big, const StaircaseSubgroup& small);
// [G : h].
ExtNat index_in_group(const StaircaseSubgroup& h);

}  // namespace oag
