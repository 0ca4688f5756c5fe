#include "oag/oracle.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace oag {

namespace {

[[noreturn]] void refuse(std::uint64_t need) {
    throw domain_error("oracle enumeration of " + std::to_string(need) +
                       " candidates exceeds the cap (" + std::to_string(oracle_enum_cap()) +
                       "); raise OAG_MAX_ENUM to insist");
}

// Per-coordinate modulus of a staircase, recomputed from its canonical term
// decomposition: coordinate c sees the sum of m_i·A_c over all terms whose
// convex subgroup covers c, and m·A + m'·A = gcd(m, m')·A.
long long covering_modulus(const StaircaseSubgroup& h, std::size_t c) {
    auto [terms, tail] = h.canonical_terms();
    long long m = 0;
    for (auto& t : terms)
        if (t.level < c) m = std::gcd(m, t.multiplier);
    m = std::gcd(m, tail);
    return m;
}

// q ∈ m·A for a realized rank-1 component: q/m must have denominator
// supported in the invertible primes.
bool coord_in_multiple(const ArchComponent& comp, const Rational& q, long long m) {
    if (q.is_zero()) return true;
    if (m == 0) return false;
    if (!comp.realization) throw domain_error("oracle needs realized components");
    return comp.realization->contains(q / Rational(m));
}

// Residue modulus of m·A_c in A_c: the non-invertible part of m. The
// quotient A/mA is then Z/rZ and rationals project via a·b^{-1} mod r.
long long residue_modulus(const ArchComponent& comp, long long m) {
    if (m == 0) return 0;
    long long r = 1;
    for (long long p : prime_factors(m)) {
        if (comp.realization->prime_invertible(p)) continue;
        long long n = m;
        while (n % p == 0) { n /= p; r *= p; }
    }
    return r;
}

long long mod_pos(long long a, long long m) {
    long long r = a % m;
    return r < 0 ? r + m : r;
}

long long inv_mod(long long a, long long m) {
    long long t = 0, newt = 1, r = m, newr = mod_pos(a, m);
    while (newr != 0) {
        long long q = r / newr;
        std::swap(t -= q * newt, newt);
        std::swap(r -= q * newr, newr);
    }
    if (r != 1) throw domain_error("not invertible in residue quotient");
    return mod_pos(t, m);
}

long long project_coord(const Rational& q, long long r) {
    if (r == 1) return 0;
    return mod_pos(q.num() % r * inv_mod(q.den(), r) % r, r);
}

// Odometer over per-position value counts; calls fn with the index tuple.
template <typename Fn>
void odometer(const std::vector<std::size_t>& sizes, Fn&& fn) {
    std::vector<std::size_t> idx(sizes.size(), 0);
    if (std::any_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s == 0; })) return;
    while (true) {
        fn(idx);
        std::size_t k = idx.size();
        while (k > 0) {
            if (++idx[k - 1] < sizes[k - 1]) break;
            idx[k - 1] = 0;
            --k;
        }
        if (k == 0) return;
    }
}

std::uint64_t checked_product(const std::vector<std::size_t>& sizes) {
    std::uint64_t total = 1;
    for (std::size_t s : sizes) {
        if (s != 0 && total > oracle_enum_cap() / s) refuse(oracle_enum_cap() + 1);
        total *= s;
    }
    if (total > oracle_enum_cap()) refuse(total);
    return total;
}

}  // namespace

std::uint64_t oracle_enum_cap() {
    if (const char* env = std::getenv("OAG_MAX_ENUM")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v > 0) return v;
    }
    return 2'000'000;
}

bool oracle_contains(const StaircaseSubgroup& h, const GroupElement& x) {
    const GroupSpec& g = h.group();
    g.require_computable("oracle membership");
    for (std::size_t c = 1; c <= g.rank(); ++c)
        if (!coord_in_multiple(g.component(c), x.coord(c), covering_modulus(h, c))) return false;
    return true;
}

FiniteQuotient::FiniteQuotient(const GroupSpec& g, const StaircaseSubgroup& h) : group_(&g) {
    g.require_computable("finite quotient");
    for (std::size_t c = 1; c <= g.rank(); ++c) {
        long long m = covering_modulus(h, c);
        if (m == 0) throw domain_error("quotient by " + h.str() + " is infinite at coordinate " +
                                       std::to_string(c));
        moduli_.push_back(residue_modulus(g.component(c), m));
    }
}

std::uint64_t FiniteQuotient::size() const {
    std::uint64_t total = 1;
    for (long long m : moduli_) total *= (std::uint64_t)m;
    return total;
}

std::vector<long long> FiniteQuotient::project(const GroupElement& x) const {
    std::vector<long long> out;
    for (std::size_t c = 1; c <= moduli_.size(); ++c)
        out.push_back(project_coord(x.coord(c), moduli_[c - 1]));
    return out;
}

std::vector<long long> FiniteQuotient::add(const std::vector<long long>& a,
                                           const std::vector<long long>& b) const {
    std::vector<long long> out;
    for (std::size_t c = 0; c < moduli_.size(); ++c)
        out.push_back(mod_pos(a[c] + b[c], std::max(moduli_[c], 1LL)));
    return out;
}

std::vector<std::vector<long long>> FiniteQuotient::elements() const {
    std::vector<std::size_t> sizes(moduli_.begin(), moduli_.end());
    checked_product(sizes);
    std::vector<std::vector<long long>> out;
    odometer(sizes, [&](const std::vector<std::size_t>& idx) {
        out.emplace_back(idx.begin(), idx.end());
    });
    return out;
}

std::vector<Rational> Box::coordinate_values(const ArchComponent& c) const {
    if (denominator < 1) throw domain_error("box denominator must be positive");
    std::vector<Rational> out;
    Rational step(1, denominator);
    // first k with k/den >= lo
    long long k = (lo * Rational(denominator)).floor();
    while (Rational(k, denominator) < lo) ++k;
    for (; Rational(k, denominator) <= hi; ++k) {
        Rational q(k, denominator);
        if (!c.realization || c.realization->contains(q)) out.push_back(q);
        if (out.size() > oracle_enum_cap()) refuse(out.size());
    }
    return out;
}

bool oracle_evaluate(const FormulaPtr& f, const GroupSpec& g,
                     const std::map<std::string, GroupElement>& assignment) {
    switch (f->kind) {
        case Formula::Kind::truth: return f->is_true();
        case Formula::Kind::cmp: {
            GroupElement a = f->lhs.evaluate(g, assignment);
            GroupElement b = f->rhs.evaluate(g, assignment);
            // lexicographic comparison straight off the coordinates
            for (std::size_t c = 1; c <= g.rank(); ++c) {
                if (a.coord(c) < b.coord(c)) return f->rel != Rel::eq;
                if (b.coord(c) < a.coord(c)) return false;
            }
            return f->rel != Rel::lt;
        }
        case Formula::Kind::cong: {
            GroupElement d = sub(g, f->lhs.evaluate(g, assignment), f->rhs.evaluate(g, assignment));
            return oracle_contains(*f->modulus, d);
        }
        case Formula::Kind::f_not: return !oracle_evaluate(f->children[0], g, assignment);
        case Formula::Kind::f_and:
            return std::all_of(f->children.begin(), f->children.end(), [&](const FormulaPtr& c) {
                return oracle_evaluate(c, g, assignment);
            });
        case Formula::Kind::f_or:
            return std::any_of(f->children.begin(), f->children.end(), [&](const FormulaPtr& c) {
                return oracle_evaluate(c, g, assignment);
            });
        default:
            throw domain_error(
                "oracle evaluation covers the base quantifier-free language only");
    }
}

namespace {

std::vector<GroupElement> box_elements(const GroupSpec& g, const Box& box) {
    std::vector<std::vector<Rational>> per_coord;
    std::vector<std::size_t> sizes;
    for (std::size_t c = 1; c <= g.rank(); ++c) {
        per_coord.push_back(box.coordinate_values(g.component(c)));
        sizes.push_back(per_coord.back().size());
    }
    checked_product(sizes);
    std::vector<GroupElement> out;
    odometer(sizes, [&](const std::vector<std::size_t>& idx) {
        std::vector<Rational> coords;
        for (std::size_t c = 0; c < idx.size(); ++c) coords.push_back(per_coord[c][idx[c]]);
        out.push_back(GroupElement(g, std::move(coords)));
    });
    if (g.rank() == 0) out.push_back(GroupElement(g, {}));
    return out;
}

}  // namespace

std::vector<std::map<std::string, GroupElement>> enumerate_sat(const FormulaPtr& f,
                                                               const GroupSpec& g, const Box& box) {
    g.require_computable("oracle enumeration");
    std::vector<std::string> vars = free_variables(f);
    std::vector<GroupElement> values = box_elements(g, box);
    std::vector<std::size_t> sizes(vars.size(), values.size());
    checked_product(sizes);
    std::vector<std::map<std::string, GroupElement>> out;
    odometer(sizes, [&](const std::vector<std::size_t>& idx) {
        std::map<std::string, GroupElement> a;
        for (std::size_t i = 0; i < vars.size(); ++i) a.emplace(vars[i], values[idx[i]]);
        if (oracle_evaluate(f, g, a)) out.push_back(std::move(a));
    });
    if (vars.empty()) {
        out.clear();
        if (oracle_evaluate(f, g, {})) out.push_back({});
    }
    return out;
}

bool bounded_evaluate(const FormulaPtr& f, const GroupSpec& g, const Box& box,
                      const std::map<std::string, GroupElement>& assignment) {
    switch (f->kind) {
        case Formula::Kind::exists:
        case Formula::Kind::forall: {
            bool exists = f->kind == Formula::Kind::exists;
            for (const GroupElement& v : box_elements(g, box)) {
                auto a = assignment;
                a.insert_or_assign(f->var, v);
                if (bounded_evaluate(f->children[0], g, box, a) == exists) return exists;
            }
            return !exists;
        }
        case Formula::Kind::f_not: return !bounded_evaluate(f->children[0], g, box, assignment);
        case Formula::Kind::f_and:
            return std::all_of(f->children.begin(), f->children.end(), [&](const FormulaPtr& c) {
                return bounded_evaluate(c, g, box, assignment);
            });
        case Formula::Kind::f_or:
            return std::any_of(f->children.begin(), f->children.end(), [&](const FormulaPtr& c) {
                return bounded_evaluate(c, g, box, assignment);
            });
        default: return oracle_evaluate(f, g, assignment);
    }
}

OracleSolveResult oracle_solve(const CongruenceSystem& sys) {
    const GroupSpec& g = *sys.group;
    g.require_computable("oracle solving");
    OracleSolveResult res;
    res.moduli.assign(g.rank(), 1);
    res.pinned.assign(g.rank(), Rational(0));

    // Canonical quotient: per coordinate, lcm of the residue moduli of all
    // constraints; a zero modulus pins the coordinate to the target value.
    for (std::size_t c = 1; c <= g.rank(); ++c) {
        for (auto& cons : sys.constraints) {
            long long m = covering_modulus(cons.modulus, c);
            if (m == 0) {
                if (res.moduli[c - 1] == 0 && !(res.pinned[c - 1] == cons.target.coord(c)))
                    return res;  // two pins disagree: unsatisfiable
                res.moduli[c - 1] = 0;
                res.pinned[c - 1] = cons.target.coord(c);
            } else if (res.moduli[c - 1] != 0) {
                res.moduli[c - 1] =
                    std::lcm(res.moduli[c - 1], residue_modulus(g.component(c), m));
            }
        }
    }

    std::vector<std::size_t> sizes;
    for (long long m : res.moduli) sizes.push_back((std::size_t)std::max(m, 1LL));
    checked_product(sizes);

    auto tuple_ok = [&](const std::vector<std::size_t>& idx) {
        for (auto& cons : sys.constraints) {
            for (std::size_t c = 1; c <= g.rank(); ++c) {
                Rational rep = res.moduli[c - 1] == 0 ? res.pinned[c - 1]
                                                      : Rational((long long)idx[c - 1]);
                long long m = covering_modulus(cons.modulus, c);
                if (!coord_in_multiple(g.component(c), rep - cons.target.coord(c), m))
                    return false;
            }
        }
        return true;
    };
    odometer(sizes, [&](const std::vector<std::size_t>& idx) {
        if (!tuple_ok(idx)) return;
        std::vector<long long> r;
        for (std::size_t c = 0; c < idx.size(); ++c)
            r.push_back(res.moduli[c] == 0 ? 0 : (long long)idx[c]);
        res.residues.push_back(std::move(r));
    });
    if (g.rank() == 0 && tuple_ok({})) res.residues.push_back({});
    res.solvable = !res.residues.empty();
    return res;
}

// ------------------------------------------------------------------ fuzzing

GroupElement random_element(const GroupSpec& g, std::mt19937_64& rng, long long range) {
    std::uniform_int_distribution<long long> num(-range, range);
    std::vector<Rational> coords;
    for (std::size_t c = 1; c <= g.rank(); ++c) {
        const auto& real = g.component(c).realization;
        long long den = 1;
        if (real && real->dense()) {
            // small denominator from the invertible primes, often 1
            long long p = real->all_invertible ? 2 + 3 * (long long)(rng() % 2)
                                               : *real->invertible.begin();
            switch (rng() % 4) {
                case 0: den = p; break;
                case 1: den = p * p; break;
                default: den = 1;
            }
        }
        coords.push_back(Rational(num(rng), den));
    }
    return GroupElement(g, std::move(coords));
}

StaircaseSubgroup random_staircase(const GroupSpec& g, std::mt19937_64& rng, long long max_eff) {
    std::vector<long long> eff(g.rank(), 0);
    std::size_t zeros = rng() % (g.rank() + 1);
    if (rng() % 3 != 0) zeros = 0;  // mostly no forced-zero prefix
    // Build the moduli as a divisibility chain from the deepest coordinate up;
    // anything else does not name a subgroup of this form.
    static const long long factors[] = {1, 1, 2, 3, 4};
    long long cur = 1 + (long long)(rng() % (std::uint64_t)max_eff);
    for (std::size_t c = g.rank(); c > zeros; --c) {
        eff[c - 1] = cur;
        long long f = factors[rng() % 5];
        if (cur <= 72 / f) cur *= f;  // keep moduli small enough to brute-force
    }
    return StaircaseSubgroup::from_effective_moduli(g, std::move(eff));
}

CongruenceSystem random_congruence_system(const GroupSpec& g, std::mt19937_64& rng,
                                          std::size_t max_constraints, long long max_eff) {
    CongruenceSystem sys;
    sys.group = &g;
    std::size_t n = 1 + rng() % max_constraints;
    for (std::size_t i = 0; i < n; ++i)
        sys.constraints.push_back(
            {random_element(g, rng, 20), random_staircase(g, rng, max_eff)});
    return sys;
}

FormulaPtr random_qf_formula(const GroupSpec& g, std::mt19937_64& rng,
                             const std::vector<std::string>& vars, std::size_t atoms) {
    auto term = [&]() {
        LinearTerm t;
        for (auto& v : vars)
            if (rng() % 2) t = t + LinearTerm::variable(v, (long long)(rng() % 5) - 2);
        if (rng() % 2) t = t + LinearTerm::constant(random_element(g, rng, 6));
        return t;
    };
    std::vector<FormulaPtr> pool;
    for (std::size_t i = 0; i < atoms; ++i) {
        FormulaPtr a;
        if (rng() % 2) {
            Rel r = rng() % 3 == 0 ? Rel::eq : (rng() % 2 ? Rel::lt : Rel::le);
            a = Formula::make_cmp(term(), r, term());
        } else {
            a = Formula::make_cong(term(), term(), random_staircase(g, rng, 6));
        }
        if (rng() % 4 == 0) a = Formula::make_not(a);
        pool.push_back(a);
    }
    // fold into a random and/or tree
    while (pool.size() > 1) {
        FormulaPtr a = pool.back(); pool.pop_back();
        FormulaPtr b = pool.back(); pool.pop_back();
        pool.push_back(rng() % 2 ? Formula::make_and({a, b}) : Formula::make_or({a, b}));
    }
    return pool.empty() ? Formula::truth_value(true) : pool[0];
}

OracleReport run_oracle_suite(const GroupSpec& g, const std::string& suite, std::uint64_t seed,
                              std::size_t trials) {
    std::mt19937_64 rng(seed);
    OracleReport rep;
    auto check = [&](bool ok, const std::string& msg) {
        ++rep.checks;
        if (!ok) {
            ++rep.failures;
            if (rep.messages.size() < 20) rep.messages.push_back(msg);
        }
    };

    if (suite == "staircase") {
        for (std::size_t t = 0; t < trials; ++t) {
            StaircaseSubgroup h1 = random_staircase(g, rng, 8);
            StaircaseSubgroup h2 = random_staircase(g, rng, 8);
            GroupElement x = random_element(g, rng, 30);
            bool m1 = contains(h1, x), m2 = contains(h2, x);
            check(m1 == oracle_contains(h1, x),
                  "membership mismatch: " + x.str() + " in " + h1.str());
            check((m1 && m2) == oracle_contains(intersect(h1, h2), x),
                  "intersection law fails: " + x.str());
            check(!(m1 || m2) || oracle_contains(sum(h1, h2), x),
                  "sum law fails: " + x.str());
        }
        return rep;
    }
    if (suite == "crt") {
        for (std::size_t t = 0; t < trials; ++t) {
            CongruenceSystem sys = random_congruence_system(g, rng, 3, 6);
            auto coset = solve(sys);
            OracleSolveResult ground = oracle_solve(sys);
            check(coset.has_value() == ground.solvable, "solvability mismatch on trial " +
                                                            std::to_string(t));
            if (coset && ground.solvable) {
                // every oracle solution must lie in the solver's coset, and
                // the solver's base must satisfy every constraint per the
                // oracle's own membership
                for (auto& r : ground.residues) {
                    std::vector<Rational> coords;
                    for (std::size_t c = 0; c < r.size(); ++c)
                        coords.push_back(ground.moduli[c] == 0 ? ground.pinned[c]
                                                               : Rational(r[c]));
                    GroupElement e(g, std::move(coords));
                    check(coset_contains(*coset, e),
                          "oracle solution outside solver coset on trial " + std::to_string(t));
                }
                for (auto& cons : sys.constraints)
                    check(oracle_contains(cons.modulus, sub(g, coset->base, cons.target)),
                          "solver base fails a constraint on trial " + std::to_string(t));
            }
        }
        return rep;
    }
    throw domain_error("unknown oracle suite: " + suite + " (core suites: crt, staircase)");
}

}  // namespace oag
