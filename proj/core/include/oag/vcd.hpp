#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oag/formula.hpp"
#include "oag/patterns.hpp"

namespace oag {

struct AtomCount {
    std::size_t parameter_set_size = 0;
    std::size_t atom_count = 0;
    std::string formula;
};

// Exact number of atoms of the boolean algebra generated by the instances
// phi(x, a) for a in the parameter list: the line is decomposed into cells
// (order intervals between the instance atoms' thresholds, crossed with
// cosets of the intersected congruence modulus), nonempty cells are kept
// via the solver, and the distinct instance sign vectors are counted — no
// sampling and no search. Falls back to a sign-vector sweep decided by the
// quantifier eliminator when the coset index is infinite or too large.
// params gives the order in which each tuple's values bind the parameter
// variables; the object variable is x.
AtomCount count_atoms(const FormulaPtr& phi, const std::vector<std::string>& params,
                      const std::vector<std::vector<GroupElement>>& a, const GroupSpec& g,
                      const std::string& object_var = "x");

// Closed-form atom bound: 2^(na_set_bound^na_formulas) * prod over families
// of (size_i * a_size + 1); the power factor is 1 when there are no
// non-alternating formulas.
ExtNat product_bound(const std::vector<std::size_t>& family_sizes, std::size_t a_size,
                     std::size_t na_formulas, std::size_t na_set_bound);

// The same bound derived from the formula itself: directed families from
// the non-alternating/alternating split of its atoms, the NA set bound from
// the finite congruence indices.
ExtNat formula_product_bound(const FormulaPtr& phi, const GroupSpec& g, std::size_t a_size);

struct VcSample {
    std::size_t size = 0;
    std::size_t max_atoms = 0;
    ExtNat bound;
    bool within_bound = true;
};

struct VcEstimate {
    std::vector<VcSample> samples;
    double slope = 0.0;  // log-log regression of max atom count against |A|
    bool all_within_bound = true;
};

// Empirical dual VC-density: for each size draw `trials` random parameter
// sets, record the maximum atom count, and regress log(count) on log(size).
VcEstimate estimate_dual_vc(const FormulaPtr& phi, const GroupSpec& g,
                            const std::vector<std::size_t>& sizes, std::size_t trials,
                            std::uint64_t seed, const std::string& object_var = "x");

// Parameter family realizing many sign vectors from a checked pattern with
// rows phi_i(x, y_i) and C columns: the row formulas are disjoined into one
// formula over the concatenated (renamed-apart) parameter slots, and tuple
// b_{i,j} carries column j in slot i and the last column everywhere else.
// For a valid ict pattern this realizes at least (C-1)^rows sign vectors.
struct SignFamily {
    FormulaPtr formula;
    std::vector<std::string> params;
    std::vector<std::vector<GroupElement>> tuples;
};
SignFamily pattern_sign_family(const Pattern& p, const GroupSpec& g);

}  // namespace oag
