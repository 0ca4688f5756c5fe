#pragma once

#include <string>
#include <vector>

#include "oag/formula.hpp"

namespace oag {

// Human-readable record of an elimination run (CLI --trace).
struct EliminationTrace {
    std::string input;
    std::vector<std::string> steps;
    std::string output;
};

struct QeOptions {
    // Hard cap on atoms emitted per elimination; exceeded → domain_error
    // (the DNF expansion is accepted at desk scale, never degraded silently).
    std::size_t atom_budget = 50000;
    EliminationTrace* trace = nullptr;
};

// Eliminate one top-level existential quantifier. The body must be
// quantifier-free and already expanded to base atoms (run expand_derived
// and expand_composite_modulus as needed). The output is quantifier-free,
// uses only order atoms and staircase congruence atoms over the remaining
// free variables, and is equivalent on every assignment.
FormulaPtr eliminate_exists(const FormulaPtr& f, const GroupSpec& g, const QeOptions& opt = {});

// Full quantifier elimination, innermost-first; forall goes through ¬∃¬.
// Derived atoms are expanded automatically.
FormulaPtr eliminate_all(const FormulaPtr& f, const GroupSpec& g, const QeOptions& opt = {});

// Alternation-theoretic tag of a single atom: order/equality atoms define
// convex sets; a congruence atom whose modulus has finite index in G can
// only cut finitely many classes (NA); the rest are genuine congruence
// atoms tagged by their modulus' prime and convex part.
struct AtomClass {
    enum class Tag { order_convex, na, congruence };
    Tag tag;
    long long p = 0;               // congruence tag only
    std::size_t delta_level = 0;   // convex part CS(level), congruence tag only
};
AtomClass classify_atom(const FormulaPtr& atom, const GroupSpec& g);

// Partition of the non-NA atoms of a quantifier-free formula into directed
// families: at most one order family plus one family per (prime, promoted
// convex level), where levels whose crossed components have finite
// p-dimension are promoted upward (those cosets differ by finite index).
struct DirectedFamily {
    bool order = false;
    long long p = 0;
    std::size_t delta_level = 0;
    std::vector<FormulaPtr> atoms;
};
std::vector<DirectedFamily> directed_family_partition(const FormulaPtr& f, const GroupSpec& g);

}  // namespace oag
