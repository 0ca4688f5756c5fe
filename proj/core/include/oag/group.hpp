#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "oag/extnat.hpp"
#include "oag/rational.hpp"

namespace oag {

// Thrown for semantically invalid inputs (bad specs, elements outside the
// group, operations that need a realized group, ...). The CLI maps this to
// exit code 1.
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

std::vector<long long> prime_factors(long long n);  // distinct primes of |n|
bool is_prime(long long n);

// For each prime p, the dimension dim_p = dim_{F_p}(A/pA) of an archimedean
// component, stored as a finite exception map plus a default for all other
// primes.
class PrimeDimProfile {
public:
    PrimeDimProfile() : default_(0) {}
    PrimeDimProfile(std::map<long long, ExtNat> exceptions, ExtNat def);

    ExtNat at(long long p) const;
    const std::map<long long, ExtNat>& exceptions() const { return exceptions_; }
    ExtNat default_dim() const { return default_; }

    bool operator==(const PrimeDimProfile& o) const {
        return exceptions_ == o.exceptions_ && default_ == o.default_;
    }

private:
    std::map<long long, ExtNat> exceptions_;  // keys are primes
    ExtNat default_;
};

// A computable rank-1 group: the subgroup of Q generated by 1/p^k for the
// invertible primes p (Z when none are invertible, Q when all are).
struct RankOneRealization {
    bool all_invertible = false;          // Q
    std::set<long long> invertible;       // Z_inv{...}; empty + !all => Z

    bool prime_invertible(long long p) const {
        return all_invertible || invertible.count(p) > 0;
    }
    bool is_z() const { return !all_invertible && invertible.empty(); }
    // true iff the group is dense in Q (any invertible prime suffices)
    bool dense() const { return all_invertible || !invertible.empty(); }
    // Membership of a rational in the realized subgroup of Q.
    bool contains(const Rational& q) const;
    std::string str() const;
};

struct ArchComponent {
    std::string name;
    PrimeDimProfile dims;
    bool discrete = false;
    std::optional<RankOneRealization> realization;

    ExtNat dim_p(long long p) const { return dims.at(p); }
    // n-divisible: every prime of n has dim_p = 0.
    bool n_divisible(long long n) const;
};

// A finite lexicographic product of archimedean components. Component 1 is
// the most significant coordinate. An optional omega_tower marks an infinite
// repetition of a template component below the listed ones; such specs are
// classification-only (no element computation).
class GroupSpec {
public:
    GroupSpec() = default;
    GroupSpec(std::vector<ArchComponent> components,
              std::optional<ArchComponent> omega_tower = std::nullopt);

    std::size_t rank() const { return components_.size(); }  // finite part
    const ArchComponent& component(std::size_t i) const;     // 1-based
    const std::vector<ArchComponent>& components() const { return components_; }
    const std::optional<ArchComponent>& omega_tower() const { return omega_tower_; }

    bool trivial() const { return components_.empty() && !omega_tower_; }
    bool computable() const;
    void require_computable(const char* op) const;

    // Primes that can matter for invariants: all exception keys plus the
    // primes of any supplied modulus.
    std::set<long long> relevant_primes() const;

    bool operator==(const GroupSpec& o) const;

private:
    std::vector<ArchComponent> components_;
    std::optional<ArchComponent> omega_tower_;
};

// The convex subgroup CS(level) of everything vanishing at coordinates
// 1..level. level = 0 is the whole group, level = rank() is {0}.
class ConvexSubgroup {
public:
    ConvexSubgroup() : level_(0) {}
    ConvexSubgroup(const GroupSpec& g, std::size_t level);

    std::size_t level() const { return level_; }
    bool operator==(const ConvexSubgroup& o) const { return level_ == o.level_; }
    bool operator!=(const ConvexSubgroup& o) const { return level_ != o.level_; }
    // Containment is reverse to levels.
    bool operator<=(const ConvexSubgroup& o) const { return level_ >= o.level_; }

    std::string str() const { return "D" + std::to_string(level_); }

private:
    std::size_t level_;
};

// An element of a computable GroupSpec: one rational per component, with
// denominators supported in the component's invertible primes.
class GroupElement {
public:
    GroupElement() = default;
    GroupElement(const GroupSpec& g, std::vector<Rational> coords);

    static GroupElement zero(const GroupSpec& g);
    static GroupElement unit(const GroupSpec& g, std::size_t coord);  // 1-based

    std::size_t size() const { return coords_.size(); }
    const Rational& coord(std::size_t i) const { return coords_.at(i - 1); }  // 1-based
    const std::vector<Rational>& coords() const { return coords_; }

    bool is_zero() const;
    // 1-based index of the leading (most significant) nonzero coordinate;
    // nullopt for zero.
    std::optional<std::size_t> leading_index() const;

    std::string str() const;
    bool operator==(const GroupElement& o) const { return coords_ == o.coords_; }
    bool operator!=(const GroupElement& o) const { return !(*this == o); }
    bool operator<(const GroupElement& o) const;  // lexicographic group order

private:
    std::vector<Rational> coords_;
};

GroupElement add(const GroupSpec& g, const GroupElement& a, const GroupElement& b);
GroupElement neg(const GroupSpec& g, const GroupElement& a);
GroupElement sub(const GroupSpec& g, const GroupElement& a, const GroupElement& b);
// n may be negative; n*a always stays in the group.
GroupElement scalar_mul(const GroupSpec& g, long long n, const GroupElement& a);
// -1 / 0 / +1 in the lexicographic order.
int compare(const GroupElement& a, const GroupElement& b);

// Archimedean class operators. A_of(g) is the largest convex subgroup not
// containing g; B_of(g) the smallest containing it; both undefined at 0
// (nullopt).
std::optional<ConvexSubgroup> A_of(const GroupSpec& g, const GroupElement& x);
std::optional<ConvexSubgroup> B_of(const GroupSpec& g, const GroupElement& x);
// A_n: smallest convex C with B(g)/C n-regular; undefined at 0.
std::optional<ConvexSubgroup> A_n_of(const GroupSpec& g, const GroupElement& x, long long n);
// F_n: largest convex C missing the coset x + nG; nullopt when x ∈ nG.
std::optional<ConvexSubgroup> F_n_of(const GroupSpec& g, const GroupElement& x, long long n);

// Whether rational q lies in n * A for the realized component.
bool coord_in_n_component(const ArchComponent& c, const Rational& q, long long n);

}  // namespace oag
