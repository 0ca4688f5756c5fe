#include "oag/group.hpp"

#include <algorithm>
#include <sstream>

namespace oag {

bool is_prime(long long n) {
    if (n < 2) return false;
    for (long long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::vector<long long> prime_factors(long long n) {
    if (n < 0) n = -n;
    std::vector<long long> out;
    for (long long d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            out.push_back(d);
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

PrimeDimProfile::PrimeDimProfile(std::map<long long, ExtNat> exceptions, ExtNat def)
    : exceptions_(std::move(exceptions)), default_(def) {
    for (auto& [p, d] : exceptions_) {
        if (!is_prime(p)) throw domain_error("dimension profile key " + std::to_string(p) + " is not prime");
        (void)d;
    }
}

ExtNat PrimeDimProfile::at(long long p) const {
    auto it = exceptions_.find(p);
    return it != exceptions_.end() ? it->second : default_;
}

bool RankOneRealization::contains(const Rational& q) const {
    if (all_invertible) return true;
    long long d = q.den();
    for (long long p : prime_factors(d))
        if (!invertible.count(p)) return false;
    return true;
}

std::string RankOneRealization::str() const {
    if (all_invertible) return "Q";
    if (invertible.empty()) return "Z";
    std::string s = "Z_inv{";
    bool first = true;
    for (long long p : invertible) {
        if (!first) s += ",";
        s += std::to_string(p);
        first = false;
    }
    return s + "}";
}

bool ArchComponent::n_divisible(long long n) const {
    for (long long p : prime_factors(n))
        if (dim_p(p) != ExtNat(0)) return false;
    return true;
}

namespace {

void check_component(const ArchComponent& c) {
    if (c.realization) {
        const auto& r = *c.realization;
        if (c.discrete != r.is_z())
            throw domain_error("component " + c.name + ": discrete flag must match realization (Z iff discrete)");
        // Realized rank-1 groups have dim_p = 0 exactly at invertible primes
        // and 1 elsewhere.
        ExtNat want_default = r.all_invertible ? ExtNat(0) : ExtNat(1);
        if (c.dims.default_dim() != want_default)
            throw domain_error("component " + c.name + ": dimension default inconsistent with realization");
        for (auto& [p, d] : c.dims.exceptions()) {
            ExtNat want = r.prime_invertible(p) ? ExtNat(0) : ExtNat(1);
            if (d != want)
                throw domain_error("component " + c.name + ": dim at prime " + std::to_string(p) +
                                   " inconsistent with realization");
        }
        for (long long p : r.invertible)
            if (c.dims.at(p) != ExtNat(0))
                throw domain_error("component " + c.name + ": invertible prime " + std::to_string(p) +
                                   " must have dimension 0");
    } else if (c.discrete) {
        // A discrete archimedean group is isomorphic to Z.
        if (c.dims.default_dim() != ExtNat(1))
            throw domain_error("component " + c.name + ": discrete component needs dimension 1 at every prime");
        for (auto& [p, d] : c.dims.exceptions())
            if (d != ExtNat(1))
                throw domain_error("component " + c.name + ": discrete component needs dimension 1 at prime " +
                                   std::to_string(p));
    }
}

}  // namespace

GroupSpec::GroupSpec(std::vector<ArchComponent> components,
                     std::optional<ArchComponent> omega_tower)
    : components_(std::move(components)), omega_tower_(std::move(omega_tower)) {
    for (const auto& c : components_) check_component(c);
    if (omega_tower_) check_component(*omega_tower_);
}

const ArchComponent& GroupSpec::component(std::size_t i) const {
    if (i < 1 || i > components_.size())
        throw domain_error("component index " + std::to_string(i) + " out of range");
    return components_[i - 1];
}

bool GroupSpec::computable() const {
    if (omega_tower_) return false;
    for (const auto& c : components_)
        if (!c.realization) return false;
    return true;
}

void GroupSpec::require_computable(const char* op) const {
    if (!computable())
        throw domain_error(std::string(op) + " needs a fully realized group spec without an omega tower");
}

std::set<long long> GroupSpec::relevant_primes() const {
    std::set<long long> out;
    auto collect = [&](const ArchComponent& c) {
        for (auto& [p, d] : c.dims.exceptions()) {
            out.insert(p);
            (void)d;
        }
    };
    for (const auto& c : components_) collect(c);
    if (omega_tower_) collect(*omega_tower_);
    return out;
}

bool GroupSpec::operator==(const GroupSpec& o) const {
    auto comp_eq = [](const ArchComponent& a, const ArchComponent& b) {
        bool real_eq = a.realization.has_value() == b.realization.has_value();
        if (real_eq && a.realization)
            real_eq = a.realization->all_invertible == b.realization->all_invertible &&
                      a.realization->invertible == b.realization->invertible;
        return a.dims == b.dims && a.discrete == b.discrete && real_eq;
    };
    if (components_.size() != o.components_.size()) return false;
    for (std::size_t i = 0; i < components_.size(); ++i)
        if (!comp_eq(components_[i], o.components_[i])) return false;
    if (omega_tower_.has_value() != o.omega_tower_.has_value()) return false;
    if (omega_tower_ && !comp_eq(*omega_tower_, *o.omega_tower_)) return false;
    return true;
}

ConvexSubgroup::ConvexSubgroup(const GroupSpec& g, std::size_t level) : level_(level) {
    if (level > g.rank())
        throw domain_error("convex subgroup level " + std::to_string(level) + " exceeds rank " +
                           std::to_string(g.rank()));
}

GroupElement::GroupElement(const GroupSpec& g, std::vector<Rational> coords)
    : coords_(std::move(coords)) {
    g.require_computable("element construction");
    if (coords_.size() != g.rank())
        throw domain_error("element has " + std::to_string(coords_.size()) + " coordinates, group has rank " +
                           std::to_string(g.rank()));
    for (std::size_t i = 0; i < coords_.size(); ++i)
        if (!g.component(i + 1).realization->contains(coords_[i]))
            throw domain_error("coordinate " + std::to_string(i + 1) + " = " + coords_[i].str() +
                               " not in component " + g.component(i + 1).realization->str());
}

GroupElement GroupElement::zero(const GroupSpec& g) {
    return GroupElement(g, std::vector<Rational>(g.rank(), Rational(0)));
}

GroupElement GroupElement::unit(const GroupSpec& g, std::size_t coord) {
    std::vector<Rational> v(g.rank(), Rational(0));
    v.at(coord - 1) = Rational(1);
    return GroupElement(g, std::move(v));
}

bool GroupElement::is_zero() const {
    return std::all_of(coords_.begin(), coords_.end(), [](const Rational& q) { return q.is_zero(); });
}

std::optional<std::size_t> GroupElement::leading_index() const {
    for (std::size_t i = 0; i < coords_.size(); ++i)
        if (!coords_[i].is_zero()) return i + 1;
    return std::nullopt;
}

std::string GroupElement::str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (i) os << ",";
        os << coords_[i].str();
    }
    os << ")";
    return os.str();
}

bool GroupElement::operator<(const GroupElement& o) const { return compare(*this, o) < 0; }

namespace {
void check_same_rank(const GroupElement& a, const GroupElement& b) {
    if (a.size() != b.size()) throw domain_error("element rank mismatch");
}
}  // namespace

GroupElement add(const GroupSpec& g, const GroupElement& a, const GroupElement& b) {
    check_same_rank(a, b);
    std::vector<Rational> v;
    v.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v.push_back(a.coords()[i] + b.coords()[i]);
    return GroupElement(g, std::move(v));
}

GroupElement neg(const GroupSpec& g, const GroupElement& a) {
    std::vector<Rational> v;
    v.reserve(a.size());
    for (const auto& q : a.coords()) v.push_back(-q);
    return GroupElement(g, std::move(v));
}

GroupElement sub(const GroupSpec& g, const GroupElement& a, const GroupElement& b) {
    return add(g, a, neg(g, b));
}

GroupElement scalar_mul(const GroupSpec& g, long long n, const GroupElement& a) {
    std::vector<Rational> v;
    v.reserve(a.size());
    for (const auto& q : a.coords()) v.push_back(q * Rational(n));
    return GroupElement(g, std::move(v));
}

int compare(const GroupElement& a, const GroupElement& b) {
    check_same_rank(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.coords()[i] < b.coords()[i]) return -1;
        if (b.coords()[i] < a.coords()[i]) return 1;
    }
    return 0;
}

std::optional<ConvexSubgroup> A_of(const GroupSpec& g, const GroupElement& x) {
    auto lead = x.leading_index();
    if (!lead) return std::nullopt;
    return ConvexSubgroup(g, *lead);
}

std::optional<ConvexSubgroup> B_of(const GroupSpec& g, const GroupElement& x) {
    auto lead = x.leading_index();
    if (!lead) return std::nullopt;
    return ConvexSubgroup(g, *lead - 1);
}

std::optional<ConvexSubgroup> A_n_of(const GroupSpec& g, const GroupElement& x, long long n) {
    if (n == 0) throw domain_error("A_n needs n != 0");
    auto lead = x.leading_index();
    if (!lead) return std::nullopt;
    // Walk down from the leading coordinate; the first component that is not
    // n-divisible bounds the n-regular quotient of B(x).
    for (std::size_t j = *lead; j <= g.rank(); ++j)
        if (!g.component(j).n_divisible(n)) return ConvexSubgroup(g, j);
    return ConvexSubgroup(g, g.rank());
}

bool coord_in_n_component(const ArchComponent& c, const Rational& q, long long n) {
    if (n == 0) return q.is_zero();
    if (!c.realization) throw domain_error("coordinate divisibility needs a realized component");
    return c.realization->contains(q / Rational(n));
}

std::optional<ConvexSubgroup> F_n_of(const GroupSpec& g, const GroupElement& x, long long n) {
    if (n == 0) throw domain_error("F_n needs n != 0");
    g.require_computable("F_n");
    // F_n(x) is the largest convex subgroup missing x + nG: the first level
    // whose leading coordinates already obstruct divisibility by n.
    for (std::size_t l = 1; l <= g.rank(); ++l)
        if (!coord_in_n_component(g.component(l), x.coord(l), n)) return ConvexSubgroup(g, l);
    return std::nullopt;  // x ∈ nG
}

}  // namespace oag
