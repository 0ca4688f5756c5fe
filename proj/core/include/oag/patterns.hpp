#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oag/formula.hpp"
#include "oag/invariants.hpp"

namespace oag {

// One row of a pattern: a quantifier-free formula template over the object
// variable x and the listed parameter variables, plus one value tuple per
// column. k is the row's inconsistency bound (inp patterns only).
struct PatternRow {
    FormulaPtr formula;
    std::vector<std::string> params;
    std::vector<std::vector<GroupElement>> columns;  // columns[j][k] = value of params[k]
    long long k = 2;
};

// Finite rectangular pattern array. The infinite arrays of the theory are
// checked here at a finite column count M; CheckReport::unbounded records
// when symbolic capacities certify that the array extends to any M.
struct Pattern {
    enum class Kind { ict, wict, special, inp };

    Kind kind = Kind::ict;
    std::string object_var = "x";
    std::vector<PatternRow> rows;

    std::size_t columns() const;  // M; throws if the array is not rectangular
};

std::string pattern_kind_name(Pattern::Kind k);

struct CheckReport {
    bool valid = false;
    std::size_t paths_checked = 0;
    std::vector<std::string> failures;  // failing paths / consistent subsets
    // Per-row column capacity: [G : H] for a pure congruence row, infinity
    // for a pure order row, nullopt when not derivable from the row's shape.
    std::vector<std::optional<ExtNat>> row_capacities;
    // Every row capacity known and infinite: the array extends to any M.
    bool unbounded = false;
    std::string note;
};

// Decide the pattern's defining satisfiability conditions path by path with
// the quantifier eliminator. ict: for every path f the system
// {phi_i(x, a_{f(i)})} + {not phi_i(x, a_j) : j != f(i)} is satisfiable;
// wict: negations only for j > f(i); special: the single two-column system
// over all rows; inp: every path positively satisfiable and every row
// k_i-inconsistent (checked on all k_i-subsets).
CheckReport check(const Pattern& p, const GroupSpec& g);

// Build an inp pattern of depth |h| and M columns from a chain-condition
// family of staircase subgroups: verifies distributivity
// (meet over i<r of (H_i + H_r)) = (meet over i<r of H_i) + H_r and the
// capacity requirement [K_i : H_i] >= M with K_i the meet over j != i of
// (H_j + H_i), then picks M pairwise H_i-incongruent representatives of K_i
// per row in a fixed enumeration order. Rows are x = y mod H_i with k = 2.
// Errors name the failing hypothesis ("distributivity" / "infinity").
Pattern construct_inp_from_chain(const GroupSpec& g, const std::vector<StaircaseSubgroup>& h,
                                 std::size_t m);

// Build an inp witness of the requested depth for the group itself: depth-1
// congruence rows H = D + p^e G derived from the p-regular jump data (jumps
// whose successor quotient holds at least M residue classes mod p), plus one
// order row of consecutive half-open windows. The closed-form identities for
// the meets and joins of the H family are re-verified structurally before
// the pattern is returned. Errors report the per-(p, jump) capacities when
// the depth is unrealizable at M columns.
Pattern construct_dp_witness(const GroupSpec& g, std::size_t depth, std::size_t m);

enum class TransformRule { special_to_ict, split_disjunction, split_conjunction };

struct TransformResult {
    Pattern pattern;
    CheckReport report;
    // Empty on success; starts with "EXPECTED_LIMITATION" when the finite
    // array loses validity under the transform (the underlying arguments
    // use indiscernibility, which finite arrays need not have).
    std::string note;
};

// Syntactic pattern transforms:
//  - special_to_ict: row formulas become biconditionals
//    psi(x, y z) = phi(x, y) <-> not phi(x, z) over paired columns.
//  - split_disjunction: replace each top-level-disjunctive row formula by
//    one of its disjuncts (searching for a choice that keeps check valid).
//  - split_conjunction: likewise for conjunctions; wict patterns only —
//    rejected for ict, where the reduction fails (dense order y1<x<y2).
// The transformed pattern is re-checked and the outcome reported.
TransformResult transform(const Pattern& p, TransformRule rule, const GroupSpec& g);

// Line-oriented pattern file format:
//   kind <ict|wict|special|inp>
//   row [k=<n>] params <name>... : <formula>
//   col <element> <element>...          (one per column, one element per param)
// '#' starts a comment; element literals are coordinate tuples "(1, 3/2)".
Pattern parse_pattern(const std::string& text, const GroupSpec& g);
std::string format_pattern(const Pattern& p);

}  // namespace oag
