#include "oag/staircase.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace oag {

namespace {

// Strip the primes with dim_p(component) = 0; those act invertibly, so
// m·A = strip(m)·A.
long long reduce_modulus(const ArchComponent& comp, long long m) {
    if (m == 0) return 0;
    if (m < 0) m = -m;
    for (long long p : prime_factors(m))
        if (comp.dim_p(p) == ExtNat(0))
            while (m % p == 0) m /= p;
    return m;
}

long long vp(long long n, long long p) {
    long long e = 0;
    while (n % p == 0) { n /= p; ++e; }
    return e;
}

}  // namespace

StaircaseSubgroup::StaircaseSubgroup(const GroupSpec& g, std::vector<long long> eff)
    : group_(&g), eff_(std::move(eff)) {
    if (g.omega_tower())
        throw domain_error("staircase subgroups need a finite-rank group spec");
    bool seen_nonzero = false;
    for (std::size_t c = 0; c < eff_.size(); ++c) {
        eff_[c] = reduce_modulus(g.component(c + 1), eff_[c]);
        if (eff_[c] != 0) seen_nonzero = true;
        else if (seen_nonzero)
            throw domain_error("staircase subgroup: forced-zero coordinates must form a prefix");
    }
    // The vector must be the componentwise reduction of a divisibility
    // chain (deeper moduli divide shallower ones): an arbitrary product of
    // per-coordinate subgroups is not expressible as D1 + m1·D2 + ... + m·G.
    long long closure = 1;
    for (std::size_t c = eff_.size(); c > 0 && eff_[c - 1] != 0; --c) {
        closure = std::lcm(closure, eff_[c - 1]);
        if (reduce_modulus(g.component(c), closure) != eff_[c - 1])
            throw domain_error("staircase subgroup: moduli do not reduce from a divisibility chain");
    }
}

StaircaseSubgroup StaircaseSubgroup::zero(const GroupSpec& g) {
    return StaircaseSubgroup(g, std::vector<long long>(g.rank(), 0));
}

StaircaseSubgroup StaircaseSubgroup::multiple_of_group(const GroupSpec& g, long long n) {
    if (n == 0) throw domain_error("n·G needs n != 0");
    return StaircaseSubgroup(g, std::vector<long long>(g.rank(), n < 0 ? -n : n));
}

StaircaseSubgroup StaircaseSubgroup::convex(const GroupSpec& g, const ConvexSubgroup& d) {
    std::vector<long long> eff(g.rank(), 1);
    for (std::size_t c = 0; c < d.level(); ++c) eff[c] = 0;
    return StaircaseSubgroup(g, std::move(eff));
}

StaircaseSubgroup StaircaseSubgroup::convex_plus(const GroupSpec& g, const ConvexSubgroup& d,
                                                 long long n) {
    if (n == 0) throw domain_error("D + n·G needs n != 0");
    if (n < 0) n = -n;
    std::vector<long long> eff(g.rank(), 1);
    for (std::size_t c = 0; c < d.level(); ++c) eff[c] = n;
    return StaircaseSubgroup(g, std::move(eff));
}

StaircaseSubgroup StaircaseSubgroup::from_terms(const GroupSpec& g,
                                                const std::vector<Term>& terms,
                                                long long tail_modulus) {
    if (tail_modulus < 0) throw domain_error("tail modulus must be >= 0");
    // eff(c) = gcd of the multipliers of all summands covering coordinate c;
    // a summand m·CS(l) covers coordinates > l, the tail covers everything.
    std::vector<long long> eff(g.rank(), tail_modulus);
    for (const auto& t : terms) {
        if (t.multiplier <= 0) throw domain_error("staircase multipliers must be positive");
        if (t.level > g.rank()) throw domain_error("staircase level exceeds group rank");
        for (std::size_t c = t.level; c < g.rank(); ++c)
            eff[c] = std::gcd(eff[c], t.multiplier);
    }
    return StaircaseSubgroup(g, std::move(eff));
}

StaircaseSubgroup StaircaseSubgroup::from_effective_moduli(const GroupSpec& g,
                                                           std::vector<long long> eff) {
    if (eff.size() != g.rank()) throw domain_error("effective modulus vector has wrong rank");
    return StaircaseSubgroup(g, std::move(eff));
}

bool StaircaseSubgroup::is_whole_group() const {
    return std::all_of(eff_.begin(), eff_.end(), [](long long m) { return m == 1; });
}

bool StaircaseSubgroup::is_zero() const {
    return std::all_of(eff_.begin(), eff_.end(), [](long long m) { return m == 0; });
}

bool StaircaseSubgroup::is_convex() const {
    return std::all_of(eff_.begin(), eff_.end(), [](long long m) { return m == 0 || m == 1; });
}

std::size_t StaircaseSubgroup::zero_prefix() const {
    std::size_t z = 0;
    while (z < eff_.size() && eff_[z] == 0) ++z;
    return z;
}

std::pair<std::vector<StaircaseSubgroup::Term>, long long>
StaircaseSubgroup::canonical_terms() const {
    std::vector<Term> terms;
    std::size_t z = zero_prefix();
    if (z == eff_.size()) return {{{1, eff_.size()}}, 0};  // {0} = 1·D_rank
    // Rebuild a divisibility chain witness from deep to shallow; reduced
    // values need not form a chain coordinatewise, the lcm closure does.
    std::vector<long long> w(eff_.size(), 0);
    long long acc = 1;
    for (std::size_t c = eff_.size(); c > z; --c) {
        acc = std::lcm(acc, eff_[c - 1]);
        w[c - 1] = acc;
    }
    // Runs of equal witness value, deepest first; run starting at coordinate
    // a becomes the summand value·CS(a-1).
    std::size_t c = eff_.size();
    while (c > z) {
        std::size_t a = c;
        while (a > z + 1 && w[a - 2] == w[c - 1]) --a;
        terms.push_back({w[c - 1], a - 1});
        c = a - 1;
    }
    if (terms.front().multiplier != 1 && terms.front().level < eff_.size())
        terms.insert(terms.begin(), Term{1, eff_.size()});  // leading 1·{0} summand
    long long tail = 0;
    if (z == 0) {
        tail = terms.back().multiplier;  // shallowest run covers everything
        terms.pop_back();
    }
    return {terms, tail};
}

std::string StaircaseSubgroup::str() const {
    if (is_zero()) return "D" + std::to_string(rank());
    std::size_t z = zero_prefix();
    bool constant = true, convex_plus_form = true;
    for (std::size_t c = z; c + 1 < eff_.size(); ++c)
        if (eff_[c] != eff_[c + 1]) constant = false;
    if (z == 0 && constant) {
        long long m = eff_[0];
        return m == 1 ? "G" : std::to_string(m) + "G";
    }
    if (z > 0 && constant && eff_[z] == 1) return "D" + std::to_string(z);
    // D_l + nG has eff (n,..,n,1,..,1).
    long long n = eff_[0];
    std::size_t l = 0;
    while (l < eff_.size() && eff_[l] == n) ++l;
    for (std::size_t c = l; c < eff_.size(); ++c)
        if (eff_[c] != 1) convex_plus_form = false;
    if (z == 0 && convex_plus_form && n > 1 && l < eff_.size())
        return "D" + std::to_string(l) + "+" + std::to_string(n) + "G";
    auto [terms, tail] = canonical_terms();
    std::ostringstream os;
    os << "stair[";
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) os << ", " << terms[i].multiplier << "*";
        os << "D" << terms[i].level;
    }
    if (tail > 0) os << ", " << tail << "*G";
    os << "]";
    return os.str();
}

bool StaircaseSubgroup::operator==(const StaircaseSubgroup& o) const { return eff_ == o.eff_; }

namespace {
void check_same_group(const StaircaseSubgroup& a, const StaircaseSubgroup& b) {
    if (a.rank() != b.rank()) throw domain_error("staircase subgroups of different groups");
}
}  // namespace

StaircaseSubgroup sum(const StaircaseSubgroup& a, const StaircaseSubgroup& b) {
    check_same_group(a, b);
    std::vector<long long> eff(a.eff_.size());
    for (std::size_t c = 0; c < eff.size(); ++c) eff[c] = std::gcd(a.eff_[c], b.eff_[c]);
    return StaircaseSubgroup(a.group(), std::move(eff));
}

StaircaseSubgroup intersect(const StaircaseSubgroup& a, const StaircaseSubgroup& b) {
    check_same_group(a, b);
    std::vector<long long> eff(a.eff_.size());
    for (std::size_t c = 0; c < eff.size(); ++c)
        eff[c] = (a.eff_[c] == 0 || b.eff_[c] == 0) ? 0 : std::lcm(a.eff_[c], b.eff_[c]);
    return StaircaseSubgroup(a.group(), std::move(eff));
}

StaircaseSubgroup scale(long long n, const StaircaseSubgroup& h) {
    if (n == 0) throw domain_error("scale needs n != 0");
    if (n < 0) n = -n;
    std::vector<long long> eff = h.eff_;
    for (auto& m : eff) m *= n;  // 0 stays 0
    return StaircaseSubgroup(h.group(), std::move(eff));
}

StaircaseSubgroup prefix_restriction(const StaircaseSubgroup& h, std::size_t c) {
    std::vector<long long> eff = h.eff_;
    for (std::size_t i = c; i < eff.size(); ++i) eff[i] = 1;
    return StaircaseSubgroup(h.group(), std::move(eff));
}

bool contains(const StaircaseSubgroup& h, const GroupElement& x) {
    h.group().require_computable("staircase membership");
    if (x.size() != h.rank()) throw domain_error("element rank mismatch");
    for (std::size_t c = 1; c <= h.rank(); ++c) {
        long long m = h.eff(c);
        if (m == 0) {
            if (!x.coord(c).is_zero()) return false;
        } else if (!coord_in_n_component(h.group().component(c), x.coord(c), m)) {
            return false;
        }
    }
    return true;
}

bool contains_subgroup(const StaircaseSubgroup& big, const StaircaseSubgroup& small) {
    check_same_group(big, small);
    for (std::size_t c = 1; c <= big.rank(); ++c) {
        long long b = big.eff(c), s = small.eff(c);
        if (s == 0) continue;
        if (b == 0 || s % b != 0) return false;
    }
    return true;
}

ExtNat index(const StaircaseSubgroup& big, const StaircaseSubgroup& small) {
    if (!contains_subgroup(big, small))
        throw domain_error("index: " + small.str() + " is not contained in " + big.str());
    ExtNat idx(1);
    for (std::size_t c = 1; c <= big.rank(); ++c) {
        long long b = big.eff(c), s = small.eff(c);
        if (b == s) continue;
        if (s == 0) return ExtNat::infinity();  // [m·A : 0] with A nontrivial
        // [b·A : s·A] = [A : (s/b)·A] = prod_p p^(vp(s/b)·dim_p A)
        long long q = s / b;
        for (long long p : prime_factors(q)) {
            ExtNat d = big.group().component(c).dim_p(p);
            if (d.is_infinite()) return ExtNat::infinity();
            for (long long e = vp(q, p) * (long long)d.value(); e > 0; --e) idx *= ExtNat(p);
        }
    }
    return idx;
}

ExtNat index_in_group(const StaircaseSubgroup& h) {
    return index(StaircaseSubgroup::multiple_of_group(h.group(), 1), h);
}

}  // namespace oag
