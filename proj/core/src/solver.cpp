#include "oag/solver.hpp"

#include <numeric>

namespace oag {

namespace {

// Extended gcd: returns g and x with a·x ≡ g (mod b/?) — standard Bezout.
long long egcd(long long a, long long b, long long& x, long long& y) {
    if (b == 0) { x = 1; y = 0; return a; }
    long long x1, y1;
    long long g = egcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

long long mod_pos(long long a, long long m) {
    long long r = a % m;
    return r < 0 ? r + m : r;
}

long long inv_mod(long long a, long long m) {
    long long x, y;
    long long g = egcd(mod_pos(a, m), m, x, y);
    if (g != 1) throw domain_error("modular inverse does not exist");
    return mod_pos(x, m);
}

// Merge x ≡ a (m) with x ≡ b (n) over the integers; nullopt if incompatible.
std::optional<std::pair<long long, long long>> crt_merge(long long a, long long m, long long b,
                                                         long long n) {
    long long g = std::gcd(m, n);
    if (mod_pos(b - a, g) != 0) return std::nullopt;
    long long l = std::lcm(m, n);
    long long t = mod_pos(((b - a) / g) % (n / g), n / g);
    long long inv = inv_mod(m / g, n / g);
    long long base = mod_pos(a + (__int128)m * ((__int128)t * inv % (n / g)) % l, l);
    return std::make_pair(base, l);
}

}  // namespace

std::optional<std::pair<std::size_t, std::size_t>> check_compatibility(const CongruenceSystem& s) {
    const auto& cs = s.constraints;
    for (std::size_t i = 0; i < cs.size(); ++i)
        for (std::size_t j = i + 1; j < cs.size(); ++j) {
            GroupElement diff = sub(*s.group, cs[i].target, cs[j].target);
            if (!contains(sum(cs[i].modulus, cs[j].modulus), diff)) return std::make_pair(i, j);
        }
    return std::nullopt;
}

std::optional<SolutionCoset> solve(const CongruenceSystem& s) {
    if (!s.group) throw domain_error("congruence system without a group");
    const GroupSpec& g = *s.group;
    g.require_computable("congruence solving");
    if (s.constraints.empty()) {
        return SolutionCoset{GroupElement::zero(g), StaircaseSubgroup::multiple_of_group(g, 1)};
    }
    StaircaseSubgroup joint = s.constraints[0].modulus;
    for (std::size_t i = 1; i < s.constraints.size(); ++i)
        joint = intersect(joint, s.constraints[i].modulus);

    std::vector<Rational> base(g.rank(), Rational(0));
    for (std::size_t c = 1; c <= g.rank(); ++c) {
        // Pinned coordinate: every eff-0 constraint fixes the value exactly.
        std::optional<Rational> pinned;
        for (const auto& con : s.constraints) {
            if (con.modulus.eff(c) != 0) continue;
            if (pinned && *pinned != con.target.coord(c)) return std::nullopt;
            pinned = con.target.coord(c);
        }
        // Residue constraints: scale away denominators (units of the
        // component) and run integer CRT on the reduced moduli.
        long long den = 1;
        for (const auto& con : s.constraints)
            if (con.modulus.eff(c) != 0) den = std::lcm(den, con.target.coord(c).den());
        if (pinned) den = std::lcm(den, pinned->den());
        long long a = 0, m = 1;
        for (const auto& con : s.constraints) {
            long long mod = con.modulus.eff(c);
            if (mod == 0) continue;
            Rational scaled = con.target.coord(c) * Rational(den);
            auto merged = crt_merge(a, m, mod_pos(scaled.num(), mod), mod);
            if (!merged) return std::nullopt;
            a = merged->first;
            m = merged->second;
        }
        if (pinned) {
            // The exact value must land in the residue coset.
            Rational scaled = *pinned * Rational(den);
            if (mod_pos(scaled.num() - a, m) != 0) return std::nullopt;
            base[c - 1] = *pinned;
        } else {
            // Unique integer representative in [0, m): undo the unit
            // denominator inside Z/m.
            long long rep = (m == 1) ? 0 : mod_pos((__int128)a % m * inv_mod(mod_pos(den, m), m) % m, m);
            base[c - 1] = Rational(rep);
        }
    }
    SolutionCoset out{GroupElement(g, std::move(base)), joint};
    // Every constraint must accept the base (guards subtle reduction bugs).
    for (const auto& con : s.constraints)
        if (!contains(con.modulus, sub(g, out.base, con.target))) return std::nullopt;
    return out;
}

bool coset_contains(const SolutionCoset& c, const GroupElement& x) {
    return contains(c.modulus, sub(c.modulus.group(), c.base, x));
}

namespace {

// Smallest element of b + m·Z strictly above q (discrete component).
Rational next_above(const Rational& b, long long m, const Rational& q) {
    Rational diff = q - b;
    long long t = (diff / Rational(m)).floor();
    return b + Rational(m) * Rational(t + 1);
}

bool coord_in_coset(const GroupSpec& g, std::size_t c, const Rational& b, long long m,
                    const Rational& v) {
    if (m == 0) return v == b;
    return g.component(c).realization->contains((v - b) / Rational(m));
}

// Recursive lexicographic search; tight flags say whether the bound is
// still active at this coordinate (prefixes equal so far).
bool meets(const SolutionCoset& cs, const OrderWindow& w, std::size_t c, bool lo_tight,
           bool hi_tight) {
    const GroupSpec& g = cs.modulus.group();
    if (c > g.rank()) {
        if (lo_tight && w.lower->strict) return false;
        if (hi_tight && w.upper->strict) return false;
        return true;
    }
    long long m = cs.modulus.eff(c);
    const Rational& b = cs.base.coord(c);
    bool dense = m != 0 && g.component(c).realization->dense();

    std::optional<Rational> L = lo_tight ? std::optional<Rational>(w.lower->value.coord(c))
                                         : std::nullopt;
    std::optional<Rational> U = hi_tight ? std::optional<Rational>(w.upper->value.coord(c))
                                         : std::nullopt;

    // Unbounded in at least one direction: a nonzero modulus gives
    // arbitrarily large/small coordinate values.
    if (m != 0 && (!L || !U)) return true;

    if (m == 0) {
        // Coordinate pinned to b: bounds resolve or stay tight on equality.
        if (L && b < *L) return false;
        if (U && b > *U) return false;
        return meets(cs, w, c + 1, L && b == *L, U && b == *U);
    }

    // Both bounds tight from here on.
    if (*L > *U) return false;
    if (*L < *U) {
        if (dense) return true;  // dense coset meets any open interval
        if (next_above(b, m, *L) < *U) return true;
    }
    if (coord_in_coset(g, c, b, m, *L)) {
        // Continue with x_c = L; the upper bound stays tight only when the
        // bound coordinates agree.
        if (meets(cs, w, c + 1, true, *L == *U)) return true;
    }
    if (*L < *U && coord_in_coset(g, c, b, m, *U))
        if (meets(cs, w, c + 1, false, true)) return true;
    return false;
}

}  // namespace

bool coset_meets_window(const SolutionCoset& c, const OrderWindow& w) {
    const GroupSpec& g = c.modulus.group();
    g.require_computable("coset/window intersection");
    if (w.lower && w.upper) {
        int cmp = compare(w.lower->value, w.upper->value);
        if (cmp > 0) return false;
        if (cmp == 0 && (w.lower->strict || w.upper->strict)) return false;
    }
    return meets(c, w, 1, w.lower.has_value(), w.upper.has_value());
}

}  // namespace oag
