#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oag/staircase.hpp"

namespace oag {

struct parse_error : std::runtime_error {
    std::size_t offset;
    parse_error(const std::string& what, std::size_t off)
        : std::runtime_error(what + " (at offset " + std::to_string(off) + ")"), offset(off) {}
};

// Linear term: integer combinations of variables, an optional element
// constant, and integer multiples of the symbolic constants one@l (the
// smallest positive element of G/D_l when that quotient is discrete).
class LinearTerm {
public:
    LinearTerm() = default;
    static LinearTerm variable(const std::string& name, long long coeff = 1);
    static LinearTerm constant(const GroupElement& e);
    static LinearTerm constant(std::vector<Rational> coords);
    static LinearTerm one_at(std::size_t level, long long coeff = 1);

    const std::map<std::string, long long>& coeffs() const { return coeffs_; }
    // Raw coordinates of the constant part (empty = zero); kept spec-free so
    // terms can be combined without a group at hand.
    const std::vector<Rational>& const_coords() const { return const_coords_; }
    const std::map<std::size_t, long long>& ones() const { return ones_; }

    bool is_zero() const { return coeffs_.empty() && const_coords_.empty() && ones_.empty(); }
    long long coeff_of(const std::string& v) const;

    friend LinearTerm operator+(const LinearTerm& a, const LinearTerm& b);
    friend LinearTerm operator-(const LinearTerm& a, const LinearTerm& b);
    LinearTerm operator-() const;
    LinearTerm scaled(long long n) const;
    // Replace variable v by t.
    LinearTerm substituted(const std::string& v, const LinearTerm& t) const;
    LinearTerm without_variable(const std::string& v) const;

    // Evaluate with an assignment for every variable; one@l resolves to the
    // unit at coordinate l (component l must be discrete).
    GroupElement evaluate(const GroupSpec& g,
                          const std::map<std::string, GroupElement>& assignment) const;

    bool operator==(const LinearTerm& o) const;
    std::string str() const;

private:
    std::map<std::string, long long> coeffs_;
    std::vector<Rational> const_coords_;
    std::map<std::size_t, long long> ones_;

    void prune();
};

enum class Rel { le, lt, eq };

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable formula AST. Derived atoms (an_eq .. d_pri) exist only until
// expand_derived() replaces them with base atoms.
class Formula {
public:
    enum class Kind {
        truth,       // constant true/false (flag in n: 1/0)
        cmp,         // lhs rel rhs
        cong,        // lhs == rhs mod modulus
        an_eq,       // A_n(lhs) = D_level
        fn_eq,       // F_n(lhs) = D_level
        m_k,         // M_k(lhs)
        e_nk,        // E_(n,k)(lhs)
        d_pri,       // D_(p,r,i)(lhs)
        f_not,
        f_and,
        f_or,
        exists,
        forall,
    };

    Kind kind;
    LinearTerm lhs, rhs;
    Rel rel = Rel::eq;
    std::optional<StaircaseSubgroup> modulus;
    long long n = 0, k = 0, p = 0, r = 0, i = 0;
    std::size_t level = 0;
    std::string var;
    std::vector<FormulaPtr> children;

    static FormulaPtr truth_value(bool b);
    static FormulaPtr make_cmp(LinearTerm lhs, Rel rel, LinearTerm rhs);
    static FormulaPtr make_cong(LinearTerm lhs, LinearTerm rhs, StaircaseSubgroup modulus);
    static FormulaPtr make_an_eq(long long n, LinearTerm t, std::size_t level);
    static FormulaPtr make_fn_eq(long long n, LinearTerm t, std::size_t level);
    static FormulaPtr make_m_k(long long k, LinearTerm t);
    static FormulaPtr make_e_nk(long long n, long long k, LinearTerm t);
    static FormulaPtr make_d_pri(long long p, long long r, long long i, LinearTerm t);
    static FormulaPtr make_not(FormulaPtr f);
    // n-ary connectives; nested same-kind children are flattened and
    // constants folded, so printing and re-parsing round-trips structurally.
    static FormulaPtr make_and(std::vector<FormulaPtr> children);
    static FormulaPtr make_or(std::vector<FormulaPtr> children);
    static FormulaPtr make_exists(std::string var, FormulaPtr body);
    static FormulaPtr make_forall(std::string var, FormulaPtr body);

    bool is_atom() const { return kind <= Kind::d_pri; }
    bool is_true() const { return kind == Kind::truth && n == 1; }
    bool is_false() const { return kind == Kind::truth && n == 0; }
};

bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b);
bool has_quantifiers(const FormulaPtr& f);
bool has_derived_atoms(const FormulaPtr& f);
std::vector<std::string> free_variables(const FormulaPtr& f);
FormulaPtr substitute(const FormulaPtr& f, const std::string& var, const LinearTerm& t);

// Quantifier-free evaluation; derived atoms evaluate through the
// core-algebra operators (A_n_of, F_n_of, leading-coordinate analysis), a
// deliberately different path from the expansions they are tested against.
bool evaluate(const FormulaPtr& f, const GroupSpec& g,
              const std::map<std::string, GroupElement>& assignment);

std::string print(const FormulaPtr& f);
// Parse a formula; subgroup and element literals are resolved against g.
FormulaPtr parse_formula(const std::string& text, const GroupSpec& g);
// Subgroup syntax alone: G, nG, D<l>, D<l>+<n>G, stair[...].
StaircaseSubgroup parse_subgroup(const std::string& text, const GroupSpec& g);

// Rewrite every congruence atom so composite n·G tails split into
// prime-power conjunctions (with canonical jump promotion of the convex
// part happening in the staircase normal form).
FormulaPtr expand_composite_modulus(const FormulaPtr& f);
// Replace derived atoms by quantifier-free base-atom combinations.
FormulaPtr expand_derived(const FormulaPtr& f, const GroupSpec& g);

}  // namespace oag
