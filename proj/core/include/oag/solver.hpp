#pragma once

#include <optional>
#include <vector>

#include "oag/staircase.hpp"

namespace oag {

// One constraint x ≡ target (mod modulus).
struct Congruence {
    GroupElement target;
    StaircaseSubgroup modulus;
};

struct CongruenceSystem {
    const GroupSpec* group = nullptr;
    std::vector<Congruence> constraints;
};

// A coset base + modulus; the base is canonical (each coordinate is the
// unique integer representative in [0, eff) when eff > 0, or the pinned
// value when eff = 0).
struct SolutionCoset {
    GroupElement base;
    StaircaseSubgroup modulus;
};

// Lexicographic interval constraints; strict flags distinguish < from <=.
struct Bound {
    GroupElement value;
    bool strict = false;
};

struct OrderWindow {
    std::optional<Bound> lower;
    std::optional<Bound> upper;
};

// Pairwise compatibility a_i − a_j ∈ H_i + H_j. Because staircase moduli
// form a distributive lattice, pairwise compatibility already implies
// solvability of the whole system. Returns the first failing pair.
std::optional<std::pair<std::size_t, std::size_t>> check_compatibility(const CongruenceSystem& s);

// Solution of the whole system as a coset of the intersection of the
// moduli, or nullopt when incompatible.
std::optional<SolutionCoset> solve(const CongruenceSystem& s);

bool coset_contains(const SolutionCoset& c, const GroupElement& x);

// Does the coset contain an element inside the window?
bool coset_meets_window(const SolutionCoset& c, const OrderWindow& w);

}  // namespace oag
