#include "oag/vcd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "oag/oracle.hpp"
#include "oag/qe.hpp"
#include "oag/solver.hpp"

namespace oag {

namespace {

constexpr std::size_t kMaxSatTests = 200000;
constexpr std::size_t kMaxCosets = 20000;
constexpr long long kMaxScale = 1000000;

bool ground_sat(std::vector<FormulaPtr> lits, const GroupSpec& g, const std::string& var) {
    FormulaPtr conj = Formula::make_and(std::move(lits));
    if (conj->is_true()) return true;
    if (conj->is_false()) return false;
    FormulaPtr body = expand_derived(conj, g);
    FormulaPtr out = eliminate_exists(Formula::make_exists(var, body), g);
    return evaluate(out, g, {});
}

void collect_atoms(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
    if (f->is_atom()) {
        if (f->kind != Formula::Kind::truth) out.push_back(f);
        return;
    }
    for (const auto& c : f->children) collect_atoms(c, out);
}

std::string fresh_name(const std::string& base, std::set<std::string>& used) {
    for (int i = 2;; ++i) {
        std::string cand = base + std::to_string(i);
        if (used.insert(cand).second) return cand;
    }
}

// ---- exact cell decomposition ------------------------------------------
//
// Every atom of an instance is linear in x, so after clearing denominators
// (z = C·x ranges over C·G) the atoms become  z rel v  with a concrete
// threshold v, or  z ≡ t (mod H).  The line then splits into finitely many
// cells: order intervals between consecutive thresholds crossed with cosets
// of L = C·G ∩ ⋂H, and every atom is constant on each cell.  We enumerate
// the cells, keep the nonempty ones (solver coset/window tests), and read
// each instance's sign off directly — no satisfiability search at all.

// How an atom of some instance reads in the scaled coordinate.
struct AtomRef {
    enum class Type { constant, order, cong } type;
    bool value = false;     // constant
    std::size_t id = 0;     // threshold / congruence index
    Rel rel = Rel::eq;      // order
    bool negate = false;    // order atom whose x-coefficient was negative
};

struct CellProblem {
    std::vector<GroupElement> thresholds;            // sorted, distinct
    std::vector<Congruence> congruences;             // z ≡ target mod modulus
    std::map<const Formula*, AtomRef> atom_refs;
    bool applicable = true;                          // false => fall back
};

// A region of the order decomposition: the point thresholds[i] when
// is_point, otherwise the open interval (thresholds[lo], thresholds[hi])
// with lo = hi - 1 (indices -1 / size() mean unbounded).
struct Region {
    bool is_point = false;
    long long lo = -1, hi = 0;
};

bool region_atom_value(const Region& r, std::size_t j, Rel rel, bool negate) {
    bool lt, eq;
    if (r.is_point) {
        eq = (r.lo == (long long)j);
        lt = (r.lo < (long long)j);
    } else {
        eq = false;
        lt = ((long long)j >= r.hi);
    }
    bool v = rel == Rel::eq ? eq : rel == Rel::lt ? lt : (lt || eq);
    return negate ? !v : v;
}

bool eval_instance(const FormulaPtr& f, const CellProblem& cp, const Region& r,
                   const std::vector<char>& cong_signs) {
    if (f->is_atom()) {
        const AtomRef& a = cp.atom_refs.at(f.get());
        switch (a.type) {
            case AtomRef::Type::constant: return a.value;
            case AtomRef::Type::order: return region_atom_value(r, a.id, a.rel, a.negate);
            case AtomRef::Type::cong: return cong_signs[a.id] != a.negate;
        }
    }
    switch (f->kind) {
        case Formula::Kind::f_not: return !eval_instance(f->children[0], cp, r, cong_signs);
        case Formula::Kind::f_and:
            for (const auto& c : f->children)
                if (!eval_instance(c, cp, r, cong_signs)) return false;
            return true;
        case Formula::Kind::f_or:
            for (const auto& c : f->children)
                if (eval_instance(c, cp, r, cong_signs)) return true;
            return false;
        default: throw domain_error("unexpected connective in a ground instance");
    }
}

// Scale C = lcm of all |x|-coefficients, computed in a first pass.
long long instance_scale(const std::vector<FormulaPtr>& instances, const std::string& x) {
    long long c_all = 1;
    auto visit = [&](auto&& self, const FormulaPtr& f) -> void {
        if (f->is_atom()) {
            if (f->kind == Formula::Kind::cmp || f->kind == Formula::Kind::cong) {
                long long c = (f->lhs - f->rhs).coeff_of(x);
                if (c != 0) c_all = std::lcm(c_all, std::abs(c));
            }
            return;
        }
        for (const auto& ch : f->children) self(self, ch);
    };
    for (const auto& inst : instances) visit(visit, inst);
    return c_all;
}

CellProblem build_cell_problem(const std::vector<FormulaPtr>& instances, const GroupSpec& g,
                               const std::string& x) {
    CellProblem cp;
    long long scale_c = instance_scale(instances, x);
    if (scale_c > kMaxScale) {
        cp.applicable = false;
        return cp;
    }

    std::map<std::string, std::size_t> threshold_ids;
    std::vector<GroupElement> raw_thresholds;
    auto visit = [&](auto&& self, const FormulaPtr& f) -> void {
        if (!f->is_atom()) {
            for (const auto& ch : f->children) self(self, ch);
            return;
        }
        AtomRef ref;
        if (f->kind == Formula::Kind::truth) {
            ref.type = AtomRef::Type::constant;
            ref.value = f->is_true();
        } else if (f->kind == Formula::Kind::cmp || f->kind == Formula::Kind::cong) {
            LinearTerm t = f->lhs - f->rhs;
            long long c = t.coeff_of(x);
            if (c == 0) {
                // x may still appear on both sides with a net coefficient of
                // zero; fold the difference, where it has cancelled.
                GroupElement u = t.without_variable(x).evaluate(g, {});
                ref.type = AtomRef::Type::constant;
                if (f->kind == Formula::Kind::cong)
                    ref.value = contains(*f->modulus, u);
                else
                    ref.value = f->rel == Rel::eq   ? u.is_zero()
                                : f->rel == Rel::le ? !(GroupElement::zero(g) < u)
                                                    : u < GroupElement::zero(g);
            } else {
                // c·x + u rel 0 becomes z rel (-C/c)·u in z = C·x; a
                // negative multiplier flips the inequality sense.
                long long s = scale_c / c;
                GroupElement u = t.without_variable(x).evaluate(g, {});
                GroupElement v = scalar_mul(g, -s, u);
                if (f->kind == Formula::Kind::cong) {
                    ref.type = AtomRef::Type::cong;
                    ref.id = cp.congruences.size();
                    cp.congruences.push_back({v, scale(std::abs(s), *f->modulus)});
                } else {
                    ref.type = AtomRef::Type::order;
                    ref.rel = f->rel;
                    ref.negate = (s < 0 && f->rel != Rel::eq);
                    auto [it, fresh] = threshold_ids.emplace(v.str(), raw_thresholds.size());
                    if (fresh) raw_thresholds.push_back(v);
                    ref.id = it->second;
                }
            }
        } else {
            cp.applicable = false;  // derived atom survived expansion
            return;
        }
        cp.atom_refs.emplace(f.get(), ref);
    };
    for (const auto& inst : instances) {
        visit(visit, inst);
        if (!cp.applicable) return cp;
    }

    // Sort thresholds and remap ids to sorted positions.
    std::vector<std::size_t> order(raw_thresholds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return compare(raw_thresholds[a], raw_thresholds[b]) < 0;
    });
    std::vector<std::size_t> pos(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        pos[order[i]] = i;
        cp.thresholds.push_back(raw_thresholds[order[i]]);
    }
    for (auto& [node, ref] : cp.atom_refs)
        if (ref.type == AtomRef::Type::order) ref.id = pos[ref.id];

    // z additionally satisfies z ≡ 0 (mod C·G).
    cp.congruences.push_back(
        {GroupElement::zero(g), StaircaseSubgroup::multiple_of_group(g, scale_c)});
    return cp;
}

std::size_t count_by_cells(const std::vector<FormulaPtr>& instances, const CellProblem& cp,
                           const GroupSpec& g) {
    const StaircaseSubgroup& cg = cp.congruences.back().modulus;
    StaircaseSubgroup l = cg;
    for (const auto& c : cp.congruences) l = intersect(l, c.modulus);

    // Coset representatives of L inside C·G, coordinatewise.
    std::size_t n_cosets = 1;
    std::vector<long long> steps, radix;
    for (std::size_t c = 1; c <= g.rank(); ++c) {
        if (l.eff(c) == 0) return 0;  // sentinel: caller falls back
        long long k = l.eff(c) / cg.eff(c);
        steps.push_back(cg.eff(c));
        radix.push_back(k);
        if (n_cosets > kMaxCosets / (std::size_t)k) return 0;
        n_cosets *= (std::size_t)k;
    }

    std::vector<Region> regions;
    for (std::size_t i = 0; i <= cp.thresholds.size(); ++i) {
        regions.push_back({false, (long long)i - 1, (long long)i});
        if (i < cp.thresholds.size()) regions.push_back({true, (long long)i, (long long)i});
    }

    std::set<std::vector<bool>> signs;
    std::vector<long long> digits(g.rank(), 0);
    for (std::size_t ci = 0; ci < n_cosets; ++ci) {
        std::vector<Rational> coords;
        for (std::size_t c = 0; c < g.rank(); ++c) coords.emplace_back(digits[c] * steps[c]);
        GroupElement rep(g, std::move(coords));
        SolutionCoset coset{rep, l};

        std::vector<char> cong_signs;
        for (const auto& cng : cp.congruences)
            cong_signs.push_back(contains(cng.modulus, sub(g, rep, cng.target)) ? 1 : 0);

        for (const Region& r : regions) {
            bool nonempty;
            if (r.is_point) {
                nonempty = coset_contains(coset, cp.thresholds[r.lo]);
            } else {
                OrderWindow w;
                if (r.lo >= 0) w.lower = Bound{cp.thresholds[r.lo], true};
                if (r.hi < (long long)cp.thresholds.size())
                    w.upper = Bound{cp.thresholds[r.hi], true};
                nonempty = coset_meets_window(coset, w);
            }
            if (!nonempty) continue;
            std::vector<bool> sv;
            sv.reserve(instances.size());
            for (const auto& inst : instances)
                sv.push_back(eval_instance(inst, cp, r, cong_signs));
            signs.insert(std::move(sv));
        }

        for (std::size_t c = g.rank(); c-- > 0;) {
            if (++digits[c] < radix[c]) break;
            digits[c] = 0;
        }
    }
    return signs.size();
}

}  // namespace

AtomCount count_atoms(const FormulaPtr& phi, const std::vector<std::string>& params,
                      const std::vector<std::vector<GroupElement>>& a, const GroupSpec& g,
                      const std::string& object_var) {
    g.require_computable("atom counting");
    if (has_quantifiers(phi)) throw domain_error("atom counting needs a quantifier-free formula");

    // Ground instances, deduplicated: repeated tuples generate the same set.
    std::vector<FormulaPtr> instances;
    std::set<std::string> seen;
    for (const auto& tuple : a) {
        if (tuple.size() != params.size())
            throw domain_error("parameter tuple size does not match the parameter list");
        FormulaPtr f = phi;
        for (std::size_t k = 0; k < params.size(); ++k)
            f = substitute(f, params[k], LinearTerm::constant(tuple[k]));
        f = expand_derived(f, g);
        if (seen.insert(print(f)).second) instances.push_back(std::move(f));
    }

    AtomCount out;
    out.parameter_set_size = a.size();
    out.formula = print(phi);
    if (instances.empty()) {
        out.atom_count = 1;  // the whole line is the only cell
        return out;
    }

    CellProblem cp = build_cell_problem(instances, g, object_var);
    if (cp.applicable) {
        if (std::size_t n = count_by_cells(instances, cp, g); n > 0) {
            out.atom_count = n;
            return out;
        }
        // 0 means the coset enumeration was infinite or too large; fall
        // through to the sign-search below.
    }

    std::size_t tests = 0;
    std::size_t count = 0;
    std::vector<FormulaPtr> lits;
    auto rec = [&](auto&& self, std::size_t j) -> void {
        if (j == instances.size()) {
            ++count;
            return;
        }
        for (bool positive : {true, false}) {
            lits.push_back(positive ? instances[j] : Formula::make_not(instances[j]));
            if (++tests > kMaxSatTests) throw domain_error("atom enumeration too large");
            if (ground_sat(lits, g, object_var)) self(self, j + 1);
            lits.pop_back();
        }
    };
    rec(rec, 0);
    out.atom_count = count;
    return out;
}

ExtNat product_bound(const std::vector<std::size_t>& family_sizes, std::size_t a_size,
                     std::size_t na_formulas, std::size_t na_set_bound) {
    ExtNat bound(1);
    if (na_formulas > 0) {
        // 2^(N^|Y|), saturating rather than overflowing.
        ExtNat exponent(1);
        for (std::size_t i = 0; i < na_formulas; ++i) exponent *= ExtNat(na_set_bound);
        if (exponent.is_infinite() || exponent.value() > 50) return ExtNat::infinity();
        for (unsigned long long i = 0; i < exponent.value(); ++i) bound *= ExtNat(2);
    }
    for (std::size_t s : family_sizes) bound *= ExtNat(s * a_size + 1);
    return bound;
}

ExtNat formula_product_bound(const FormulaPtr& phi, const GroupSpec& g, std::size_t a_size) {
    std::vector<std::size_t> family_sizes;
    for (const auto& fam : directed_family_partition(phi, g))
        family_sizes.push_back(fam.atoms.size());

    std::vector<FormulaPtr> atoms;
    collect_atoms(phi, atoms);
    std::size_t na_formulas = 0;
    ExtNat na_sets(2);
    for (const auto& atom : atoms) {
        if (classify_atom(atom, g).tag != AtomClass::Tag::na) continue;
        ++na_formulas;
        if (atom->kind == Formula::Kind::cong && atom->modulus) {
            ExtNat idx = index_in_group(*atom->modulus);
            if (na_sets < idx) na_sets = idx;
        }
    }
    if (na_formulas > 0 && na_sets.is_infinite()) return ExtNat::infinity();
    return product_bound(family_sizes, a_size, na_formulas,
                         na_formulas ? (std::size_t)na_sets.value() : 0);
}

VcEstimate estimate_dual_vc(const FormulaPtr& phi, const GroupSpec& g,
                            const std::vector<std::size_t>& sizes, std::size_t trials,
                            std::uint64_t seed, const std::string& object_var) {
    g.require_computable("vc estimation");
    std::vector<std::string> params;
    for (const auto& v : free_variables(phi))
        if (v != object_var) params.push_back(v);

    std::mt19937_64 rng(seed);
    VcEstimate est;
    for (std::size_t size : sizes) {
        VcSample sample;
        sample.size = size;
        long long range = 4 * (long long)size + 8;
        for (std::size_t t = 0; t < std::max<std::size_t>(trials, 1); ++t) {
            std::vector<std::vector<GroupElement>> a;
            for (std::size_t j = 0; j < size; ++j) {
                std::vector<GroupElement> tuple;
                for (std::size_t k = 0; k < params.size(); ++k)
                    tuple.push_back(random_element(g, rng, range));
                a.push_back(std::move(tuple));
            }
            sample.max_atoms = std::max(sample.max_atoms,
                                        count_atoms(phi, params, a, g, object_var).atom_count);
        }
        sample.bound = formula_product_bound(phi, g, size);
        sample.within_bound = !(sample.bound < ExtNat(sample.max_atoms));
        est.all_within_bound = est.all_within_bound && sample.within_bound;
        est.samples.push_back(sample);
    }

    // Least-squares slope of log(count) against log(size).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = est.samples.size();
    for (const auto& s : est.samples) {
        double x = std::log((double)s.size), y = std::log((double)std::max<std::size_t>(s.max_atoms, 1));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    est.slope = (n >= 2 && std::abs(denom) > 1e-12) ? (n * sxy - sx * sy) / denom : 0.0;
    return est;
}

SignFamily pattern_sign_family(const Pattern& p, const GroupSpec& g) {
    std::size_t m = p.columns();
    if (m < 2) throw domain_error("need at least two columns (the last is the dummy)");
    (void)g;

    SignFamily fam;
    std::set<std::string> used{p.object_var};
    std::vector<std::vector<std::string>> slot_names(p.rows.size());
    std::vector<FormulaPtr> disjuncts;
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        const PatternRow& row = p.rows[i];
        FormulaPtr f = row.formula;
        for (const std::string& q : row.params) {
            std::string name = used.count(q) ? fresh_name(q, used) : (used.insert(q), q);
            if (name != q) f = substitute(f, q, LinearTerm::variable(name));
            slot_names[i].push_back(name);
            fam.params.push_back(name);
        }
        disjuncts.push_back(std::move(f));
    }
    fam.formula = Formula::make_or(std::move(disjuncts));

    // b_{i,j}: column j in slot i, the dummy (last) column elsewhere.
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        for (std::size_t j = 0; j + 1 < m; ++j) {
            std::vector<GroupElement> tuple;
            for (std::size_t i2 = 0; i2 < p.rows.size(); ++i2) {
                const auto& col = (i2 == i) ? p.rows[i2].columns[j] : p.rows[i2].columns[m - 1];
                tuple.insert(tuple.end(), col.begin(), col.end());
            }
            fam.tuples.push_back(std::move(tuple));
        }
    }
    return fam;
}

}  // namespace oag
