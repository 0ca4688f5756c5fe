#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "oag/formula.hpp"
#include "oag/solver.hpp"

// Independent brute-force ground truth. Everything here recomputes simple
// semantics from first principles (membership from the term decomposition,
// solutions by residue enumeration) and deliberately shares no logic with
// the staircase/solver/qe implementations beyond the AST and element types,
// so agreement between the two is evidence, not tautology.

namespace oag {

// Largest enumeration the oracle will attempt before refusing (domain_error,
// never silent truncation). Overridable via the OAG_MAX_ENUM env var.
std::uint64_t oracle_enum_cap();

// Membership x ∈ H recomputed from H's canonical term list: coordinate c is
// constrained by the gcd of the multipliers of the terms covering it, and
// q ∈ m·A is decided directly on the rank-1 realization.
bool oracle_contains(const StaircaseSubgroup& h, const GroupElement& x);

// G/H as explicit residue tuples, one residue per coordinate.
class FiniteQuotient {
public:
    FiniteQuotient(const GroupSpec& g, const StaircaseSubgroup& h);  // finite index only

    const std::vector<long long>& moduli() const { return moduli_; }
    std::uint64_t size() const;

    std::vector<long long> project(const GroupElement& x) const;
    std::vector<long long> add(const std::vector<long long>& a,
                               const std::vector<long long>& b) const;
    // All residue tuples in a fixed odometer order (refuses above the cap).
    std::vector<std::vector<long long>> elements() const;

private:
    const GroupSpec* group_;
    std::vector<long long> moduli_;
};

// A finite grid: every coordinate of every element ranges over the lattice
// points k/denominator inside [lo, hi] that the component realization
// admits.
struct Box {
    Rational lo = Rational(-50);
    Rational hi = Rational(50);
    long long denominator = 1;

    std::vector<Rational> coordinate_values(const ArchComponent& c) const;
};

// Quantifier-free evaluation recomputed independently of evaluate():
// comparisons straight off the coordinates, congruences via
// oracle_contains. Derived atoms are out of scope here (expand them first).
bool oracle_evaluate(const FormulaPtr& f, const GroupSpec& g,
                     const std::map<std::string, GroupElement>& assignment);

// All assignments of box elements to the free variables of a
// quantifier-free formula that satisfy it, in odometer order.
std::vector<std::map<std::string, GroupElement>> enumerate_sat(const FormulaPtr& f,
                                                               const GroupSpec& g, const Box& box);

// Evaluation of an arbitrary formula with quantifiers ranging over the box
// grid. Sound only when the box is large enough to contain witnesses; used
// for cross-checking, not as a decision procedure.
bool bounded_evaluate(const FormulaPtr& f, const GroupSpec& g, const Box& box,
                      const std::map<std::string, GroupElement>& assignment);

// Exhaustive congruence solving inside the canonical residue quotient.
// moduli[c] = 0 marks a coordinate pinned to pinned[c] by a zero modulus.
struct OracleSolveResult {
    bool solvable = false;
    std::vector<long long> moduli;
    std::vector<Rational> pinned;
    std::vector<std::vector<long long>> residues;  // satisfying tuples
};
OracleSolveResult oracle_solve(const CongruenceSystem& sys);

// Seeded generators for fuzz comparisons (shared by tests and the CLI).
GroupElement random_element(const GroupSpec& g, std::mt19937_64& rng, long long range);
StaircaseSubgroup random_staircase(const GroupSpec& g, std::mt19937_64& rng, long long max_eff);
CongruenceSystem random_congruence_system(const GroupSpec& g, std::mt19937_64& rng,
                                          std::size_t max_constraints, long long max_eff);
// Random quantifier-free formula in the base language over the given
// variables (comparisons and congruences of small linear terms).
FormulaPtr random_qf_formula(const GroupSpec& g, std::mt19937_64& rng,
                             const std::vector<std::string>& vars, std::size_t atoms);

struct OracleReport {
    std::size_t checks = 0;
    std::size_t failures = 0;
    std::vector<std::string> messages;  // failure descriptions
};

// Built-in fuzz suites: "crt" (solver vs residue enumeration) and
// "staircase" (membership/lattice laws vs independent membership).
OracleReport run_oracle_suite(const GroupSpec& g, const std::string& suite, std::uint64_t seed,
                              std::size_t trials);

}  // namespace oag
