#include "oag/qe.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "oag/invariants.hpp"
#include "oag/staircase.hpp"

namespace oag {

namespace {

using K = Formula::Kind;

// ----------------------------------------------------------- NNF and DNF

// Push negations inward. Afterwards the only negations left sit directly on
// congruence atoms (order negations flip, everything else folds).
FormulaPtr nnf(const FormulaPtr& f, bool positive) {
    switch (f->kind) {
        case K::truth: return Formula::truth_value(positive == f->is_true());
        case K::cmp:
            if (positive) return f;
            switch (f->rel) {
                case Rel::le: return Formula::make_cmp(f->rhs, Rel::lt, f->lhs);
                case Rel::lt: return Formula::make_cmp(f->rhs, Rel::le, f->lhs);
                case Rel::eq:
                    return Formula::make_or({Formula::make_cmp(f->lhs, Rel::lt, f->rhs),
                                             Formula::make_cmp(f->rhs, Rel::lt, f->lhs)});
            }
            return f;
        case K::cong: return positive ? f : Formula::make_not(f);
        case K::f_not: return nnf(f->children[0], !positive);
        case K::f_and:
        case K::f_or: {
            bool conj = (f->kind == K::f_and) == positive;
            std::vector<FormulaPtr> cs;
            for (auto& c : f->children) cs.push_back(nnf(c, positive));
            return conj ? Formula::make_and(std::move(cs)) : Formula::make_or(std::move(cs));
        }
        default: throw domain_error("quantifier elimination needs base atoms (expand derived atoms first)");
    }
}

using Conjunct = std::vector<FormulaPtr>;  // literals: atoms or ¬congruence

std::vector<Conjunct> dnf(const FormulaPtr& f, std::size_t budget) {
    switch (f->kind) {
        case K::truth: return f->is_true() ? std::vector<Conjunct>{{}} : std::vector<Conjunct>{};
        case K::f_or: {
            std::vector<Conjunct> out;
            for (auto& c : f->children) {
                auto sub = dnf(c, budget);
                out.insert(out.end(), sub.begin(), sub.end());
                if (out.size() > budget) throw domain_error("DNF conjunct budget exceeded");
            }
            return out;
        }
        case K::f_and: {
            std::vector<Conjunct> out{{}};
            for (auto& c : f->children) {
                auto sub = dnf(c, budget);
                std::vector<Conjunct> next;
                for (auto& a : out)
                    for (auto& b : sub) {
                        next.push_back(a);
                        next.back().insert(next.back().end(), b.begin(), b.end());
                    }
                if (next.size() > budget) throw domain_error("DNF conjunct budget exceeded");
                out = std::move(next);
            }
            return out;
        }
        default: return {{f}};
    }
}

// --------------------------------------------------- one-variable machinery

struct PosCong {
    LinearTerm target;       // ζ ≡ target (mod h)
    StaircaseSubgroup h;
};

struct Anchor {
    LinearTerm term;
    enum class Side { lower, upper, eq } side;
    bool strict = false;
    std::size_t divreq = 0;     // >0: negation branch, must diverge exactly here
    std::size_t eq_through = 0; // eq anchor: must stay tight through this level
};

class Eliminator {
public:
    Eliminator(const GroupSpec& g, const QeOptions& opt) : g_(g), opt_(opt) {}

    FormulaPtr run(const FormulaPtr& exists_node) {
        const std::string& var = exists_node->var;
        FormulaPtr body = nnf(exists_node->children[0], true);
        trace("nnf: " + print(body));
        std::vector<FormulaPtr> disjuncts;
        for (auto& conjunct : dnf(body, opt_.atom_budget)) {
            trace("conjunct: " + print(Formula::make_and(Conjunct(conjunct))));
            disjuncts.push_back(eliminate_conjunct(conjunct, var));
        }
        return Formula::make_or(std::move(disjuncts));
    }

private:
    const GroupSpec& g_;
    const QeOptions& opt_;
    std::size_t emitted_ = 0;

    void trace(std::string line) {
        if (opt_.trace) opt_.trace->steps.push_back(std::move(line));
    }

    FormulaPtr budget(FormulaPtr f) {
        if (++emitted_ > opt_.atom_budget)
            throw domain_error("elimination atom budget exceeded (" +
                               std::to_string(opt_.atom_budget) + ")");
        return f;
    }

    // -- atom builders (all conditions on parameter terms only) ------------

    FormulaPtr prefix_eq(const LinearTerm& s, const LinearTerm& t, std::size_t level) {
        return budget(Formula::make_cong(
            s, t, StaircaseSubgroup::convex(g_, ConvexSubgroup(g_, level))));
    }
    // coordinate `level` of s is strictly below t's, given shared prefix
    FormulaPtr strict_below_at(const LinearTerm& s, const LinearTerm& t, std::size_t level) {
        return Formula::make_and({Formula::make_not(prefix_eq(s, t, level)),
                                  budget(Formula::make_cmp(s, Rel::lt, t))});
    }
    FormulaPtr at_most_at(const LinearTerm& s, const LinearTerm& t, std::size_t level) {
        return Formula::make_or({prefix_eq(s, t, level), strict_below_at(s, t, level)});
    }
    FormulaPtr cong_prefix(const LinearTerm& value, const PosCong& c, std::size_t level) {
        return budget(Formula::make_cong(value, c.target, prefix_restriction(c.h, level)));
    }
    LinearTerm unit_term(std::size_t level, long long k) {
        std::vector<Rational> coords(level, Rational(0));
        coords[level - 1] = Rational(k);
        return LinearTerm::constant(std::move(coords));
    }

    // -- per-conjunct pipeline ---------------------------------------------

    FormulaPtr eliminate_conjunct(const Conjunct& conjunct, const std::string& var) {
        std::vector<FormulaPtr> passthrough;
        std::vector<FormulaPtr> with_var;  // ζ-literals after scaling
        long long L = 1;
        for (auto& lit : conjunct) {
            const FormulaPtr& a = lit->kind == K::f_not ? lit->children[0] : lit;
            long long c = a->lhs.coeff_of(var) - a->rhs.coeff_of(var);
            if (c == 0) passthrough.push_back(lit);
            else L = std::lcm(L, std::abs(c));
        }
        // scale every ζ-literal to coefficient ±L and normalize the sign,
        // leaving `moved rel 0` shapes with moved = ±ζ + rest
        struct Scaled {
            bool negated;
            FormulaPtr atom;      // cmp or cong with lhs = moved(+ζ), rhs = 0
            LinearTerm rest;      // moved − (±1)·ζ, ζ-free
            int sign;             // coefficient sign of ζ in moved
        };
        std::vector<Scaled> lits;
        for (auto& lit : conjunct) {
            bool neg = lit->kind == K::f_not;
            const FormulaPtr& a = neg ? lit->children[0] : lit;
            LinearTerm moved = a->lhs - a->rhs;
            long long c = moved.coeff_of(var);
            if (c == 0) continue;
            long long k = L / std::abs(c);
            moved = moved.scaled(k);
            FormulaPtr scaled =
                a->kind == K::cmp
                    ? Formula::make_cmp(moved, a->rel, LinearTerm())
                    : Formula::make_cong(moved, LinearTerm(), scale(k, *a->modulus));
            lits.push_back({neg, scaled, moved.without_variable(var),
                            moved.coeff_of(var) > 0 ? 1 : -1});
        }

        // ζ = L·x ranges over L·G: record that as one more congruence
        std::vector<PosCong> congs;
        if (L > 1)
            congs.push_back({LinearTerm(), StaircaseSubgroup::multiple_of_group(g_, L)});
        trace("coefficient lcm L = " + std::to_string(L));

        // equalities substitute ζ out entirely
        for (auto& s : lits) {
            if (s.negated || s.atom->kind != K::cmp || s.atom->rel != Rel::eq) continue;
            LinearTerm d = s.sign > 0 ? -s.rest : s.rest;  // ζ = d
            std::vector<FormulaPtr> out(passthrough);
            for (auto& t : lits) {
                if (&t == &s) continue;
                LinearTerm value = t.sign > 0 ? d + t.rest : -d + t.rest;  // moved[ζ:=d]
                FormulaPtr a = t.atom->kind == K::cmp
                                   ? Formula::make_cmp(value, t.atom->rel, LinearTerm())
                                   : Formula::make_cong(value, LinearTerm(), *t.atom->modulus);
                out.push_back(t.negated ? Formula::make_not(a) : a);
            }
            for (auto& pc : congs)
                out.push_back(Formula::make_cong(d, pc.target, pc.h));
            trace("equality pins the variable; substituted");
            return Formula::make_and(std::move(out));
        }

        // sort literals into bounds / congruences / negated congruences
        std::vector<Anchor> anchors;
        std::vector<std::pair<LinearTerm, StaircaseSubgroup>> negs;  // ¬(ζ ≡ d mod J)
        for (auto& s : lits) {
            if (s.atom->kind == K::cmp) {
                bool strict = s.atom->rel == Rel::lt;
                if (s.sign > 0)  // ζ + rest ⊳ 0  →  ζ ⊳ −rest
                    anchors.push_back({-s.rest, Anchor::Side::upper, strict, 0, 0});
                else  // −ζ + rest ⊳ 0  →  rest ⊳ ζ
                    anchors.push_back({s.rest, Anchor::Side::lower, strict, 0, 0});
            } else {
                LinearTerm target = s.sign > 0 ? -s.rest : s.rest;
                if (s.negated) negs.push_back({target, *s.atom->modulus});
                else congs.push_back({target, *s.atom->modulus});
            }
        }

        // expand each negated congruence into first-failing-coordinate
        // packages; the cartesian product over negations gives sub-conjuncts
        struct Package {
            std::vector<PosCong> congs;
            std::vector<Anchor> anchors;
        };
        std::vector<std::vector<Package>> alternatives;
        for (auto& [d, j] : negs) {
            std::vector<Package> alts;
            std::size_t z = j.zero_prefix();
            for (std::size_t c = 1; c <= z; ++c) {
                // first failure inside the forced-zero prefix: the witness
                // diverges from d exactly at coordinate c, either side
                alts.push_back({{}, {Anchor{d, Anchor::Side::lower, true, c, c - 1}}});
                alts.push_back({{}, {Anchor{d, Anchor::Side::upper, true, c, c - 1}}});
            }
            for (std::size_t c = z + 1; c <= g_.rank(); ++c) {
                long long m = j.eff(c);
                for (long long k = 1; k < m; ++k)
                    alts.push_back({{PosCong{d + unit_term(c, k), prefix_restriction(j, c)}},
                                    {}});
            }
            if (alts.empty())  // J = G (or constrains nothing): ¬(ζ ≡ d mod G) is false
                return Formula::truth_value(false);
            alternatives.push_back(std::move(alts));
        }

        std::vector<FormulaPtr> disjuncts;
        std::vector<std::size_t> pick(alternatives.size(), 0);
        while (true) {
            std::vector<PosCong> cs = congs;
            std::vector<Anchor> as = anchors;
            for (std::size_t i = 0; i < pick.size(); ++i) {
                const Package& p = alternatives[i][pick[i]];
                cs.insert(cs.end(), p.congs.begin(), p.congs.end());
                as.insert(as.end(), p.anchors.begin(), p.anchors.end());
            }
            disjuncts.push_back(eliminate_normalized(cs, as));
            std::size_t k = pick.size();
            while (k > 0) {
                if (++pick[k - 1] < alternatives[k - 1].size()) break;
                pick[k - 1] = 0;
                --k;
            }
            if (k == 0) break;
        }
        return Formula::make_and({Formula::make_and(std::move(passthrough)),
                                  Formula::make_or(std::move(disjuncts))});
    }

    // ∃ζ: order anchors ∧ positive congruences, all targets ζ-free.
    FormulaPtr eliminate_normalized(std::vector<PosCong> congs, std::vector<Anchor> anchors) {
        std::vector<FormulaPtr> side;
        // pairwise compatibility: necessary globally, and per coordinate it
        // is exactly what makes the unconstrained coordinates solvable
        for (std::size_t i = 0; i < congs.size(); ++i)
            for (std::size_t j = i + 1; j < congs.size(); ++j)
                side.push_back(budget(Formula::make_cong(congs[i].target, congs[j].target,
                                                         sum(congs[i].h, congs[j].h))));
        // congruences whose modulus pins a most-significant prefix act as
        // mandatory equality anchors through the pinned coordinates
        for (auto& c : congs) {
            std::size_t z = c.h.zero_prefix();
            if (z > 0) anchors.push_back({c.target, Anchor::Side::eq, false, 0, z});
        }
        trace("anchors: " + std::to_string(anchors.size()) +
              ", congruences: " + std::to_string(congs.size()));
        std::vector<FormulaPtr> acc;
        std::vector<FormulaPtr> leaves;
        std::vector<std::size_t> active(anchors.size());
        std::iota(active.begin(), active.end(), 0);
        recurse(1, anchors, congs, active, acc, leaves);
        side.push_back(Formula::make_or(std::move(leaves)));
        return Formula::make_and(std::move(side));
    }

    // Level recursion. Invariant: the witness agrees with every active
    // anchor on all coordinates < level (their mutual agreement is enforced
    // by the accumulated guards).
    void recurse(std::size_t level, const std::vector<Anchor>& anchors,
                 const std::vector<PosCong>& congs, std::vector<std::size_t> active,
                 std::vector<FormulaPtr>& acc, std::vector<FormulaPtr>& leaves) {
        // eq anchors past their pinned prefix stop constraining anything
        std::erase_if(active, [&](std::size_t i) {
            return anchors[i].side == Anchor::Side::eq && anchors[i].eq_through < level;
        });

        if (active.empty() || level > g_.rank()) {
            // terminal: the witness equals every still-active anchor, which
            // a strict bound or a pending divergence requirement forbids
            for (std::size_t i : active)
                if (anchors[i].strict || anchors[i].divreq > 0) return;
            leaves.push_back(Formula::make_and(std::vector<FormulaPtr>(acc)));
            return;
        }

        bool mandatory = false;  // anchors that must stay tight at this level
        for (std::size_t i : active) {
            const Anchor& a = anchors[i];
            if ((a.side == Anchor::Side::eq && a.eq_through >= level) ||
                (a.divreq > level))
                mandatory = true;
        }
        auto must_keep = [&](std::size_t i) {
            const Anchor& a = anchors[i];
            return (a.side == Anchor::Side::eq && a.eq_through >= level) || a.divreq > level;
        };
        auto must_drop = [&](std::size_t i) { return anchors[i].divreq == level; };

        const ArchComponent& comp = g_.component(level);
        long long mhat = 1;
        for (auto& c : congs)
            if (c.h.eff(level) > 1) mhat = std::lcm(mhat, c.h.eff(level));

        // option (a): pin the witness's coordinate to an anchor's; choose
        // independently which other anchors stay tight
        for (std::size_t bi : active) {
            if (must_drop(bi)) continue;
            std::vector<std::size_t> others;
            for (std::size_t i : active)
                if (i != bi) others.push_back(i);
            std::size_t combos = (std::size_t)1 << others.size();
            for (std::size_t mask = 0; mask < combos; ++mask) {
                std::size_t base = acc.size();
                std::vector<std::size_t> kept{bi};
                bool ok = true;
                for (std::size_t oi = 0; oi < others.size(); ++oi) {
                    std::size_t i = others[oi];
                    bool keep = mask & ((std::size_t)1 << oi);
                    if (keep && must_drop(i)) { ok = false; break; }
                    if (!keep && must_keep(i)) { ok = false; break; }
                    if (keep) {
                        kept.push_back(i);
                        acc.push_back(prefix_eq(anchors[i].term, anchors[bi].term, level));
                    } else if (anchors[i].side == Anchor::Side::lower) {
                        acc.push_back(strict_below_at(anchors[i].term, anchors[bi].term, level));
                    } else {  // upper (eq anchors are always must_keep here)
                        acc.push_back(strict_below_at(anchors[bi].term, anchors[i].term, level));
                    }
                }
                if (ok) {
                    for (auto& c : congs) acc.push_back(cong_prefix(anchors[bi].term, c, level));
                    recurse(level + 1, anchors, congs, kept, acc, leaves);
                }
                acc.resize(base);
            }
        }

        if (mandatory) return;  // a pinned prefix forbids diverging here

        bool has_lower = false, has_upper = false;
        for (std::size_t i : active) {
            has_lower |= anchors[i].side == Anchor::Side::lower;
            has_upper |= anchors[i].side == Anchor::Side::upper;
        }

        // option (b): no active upper bound — go arbitrarily high (any
        // residue class is unbounded above); symmetric downward case.
        // Deeper coordinates are free, their solvability is exactly the
        // pairwise compatibility already emitted.
        if (!has_upper || !has_lower) {
            leaves.push_back(Formula::make_and(std::vector<FormulaPtr>(acc)));
            return;
        }

        if (comp.discrete) {
            // option (c): Cooper shifts off each lower anchor; j runs over a
            // full period of the congruences at this coordinate
            for (std::size_t bi : active) {
                if (anchors[bi].side != Anchor::Side::lower) continue;
                for (long long jshift = 1; jshift <= mhat; ++jshift) {
                    LinearTerm value = anchors[bi].term + unit_term(level, jshift);
                    std::size_t base = acc.size();
                    for (std::size_t i : active) {
                        if (i == bi) continue;
                        if (anchors[i].side == Anchor::Side::lower)
                            acc.push_back(strict_below_at(anchors[i].term, value, level));
                        else
                            acc.push_back(strict_below_at(value, anchors[i].term, level));
                    }
                    for (auto& c : congs) acc.push_back(cong_prefix(value, c, level));
                    leaves.push_back(Formula::make_and(std::vector<FormulaPtr>(acc)));
                    acc.resize(base);
                }
            }
        } else {
            // option (d): dense coordinate — a nonempty open interval meets
            // every coset, so maximal-lower < minimal-upper suffices
            for (std::size_t bi : active) {
                if (anchors[bi].side != Anchor::Side::lower) continue;
                for (std::size_t ui : active) {
                    if (anchors[ui].side != Anchor::Side::upper) continue;
                    std::size_t base = acc.size();
                    for (std::size_t i : active) {
                        if (i == bi || i == ui) continue;
                        if (anchors[i].side == Anchor::Side::lower)
                            acc.push_back(at_most_at(anchors[i].term, anchors[bi].term, level));
                        else
                            acc.push_back(at_most_at(anchors[ui].term, anchors[i].term, level));
                    }
                    acc.push_back(strict_below_at(anchors[bi].term, anchors[ui].term, level));
                    leaves.push_back(Formula::make_and(std::vector<FormulaPtr>(acc)));
                    acc.resize(base);
                }
            }
        }
    }
};

// Atoms like 2x <= 2x + y mention the bound variable with net coefficient
// zero; rewrite them variable-free so they don't leak into the output.
FormulaPtr cancel_phantom(const FormulaPtr& f, const std::string& var) {
    if (f->is_atom()) {
        if (f->kind != K::cmp && f->kind != K::cong) return f;
        LinearTerm d = f->lhs - f->rhs;
        if (d.coeff_of(var) != 0) return f;
        bool mentions = f->lhs.coeff_of(var) != 0 || f->rhs.coeff_of(var) != 0;
        if (!mentions) return f;
        if (f->kind == K::cong) return Formula::make_cong(d, LinearTerm(), *f->modulus);
        return Formula::make_cmp(d, f->rel, LinearTerm());
    }
    std::vector<FormulaPtr> ch;
    for (const auto& c : f->children) ch.push_back(cancel_phantom(c, var));
    switch (f->kind) {
        case K::f_not: return Formula::make_not(ch[0]);
        case K::f_and: return Formula::make_and(std::move(ch));
        case K::f_or: return Formula::make_or(std::move(ch));
        default: return f;
    }
}

}  // namespace

FormulaPtr eliminate_exists(const FormulaPtr& f, const GroupSpec& g, const QeOptions& opt) {
    g.require_computable("quantifier elimination");
    if (f->kind != K::exists)
        throw domain_error("eliminate_exists expects a top-level existential");
    if (has_quantifiers(f->children[0]))
        throw domain_error("eliminate_exists expects a quantifier-free body");
    if (has_derived_atoms(f->children[0]))
        throw domain_error("expand derived atoms before elimination");
    Eliminator e(g, opt);
    if (opt.trace) opt.trace->input = print(f);
    FormulaPtr out = e.run(Formula::make_exists(f->var, cancel_phantom(f->children[0], f->var)));
    if (opt.trace) opt.trace->output = print(out);
    return out;
}

namespace {

FormulaPtr eliminate_rec(const FormulaPtr& f, const GroupSpec& g, const QeOptions& opt) {
    if (!has_quantifiers(f)) return f;
    Formula copy = *f;
    copy.children.clear();
    for (auto& c : f->children) copy.children.push_back(eliminate_rec(c, g, opt));
    switch (copy.kind) {
        case K::f_and: return Formula::make_and(std::move(copy.children));
        case K::f_or: return Formula::make_or(std::move(copy.children));
        case K::f_not: return Formula::make_not(copy.children[0]);
        case K::exists:
            return eliminate_exists(Formula::make_exists(copy.var, copy.children[0]), g, opt);
        case K::forall:
            return Formula::make_not(eliminate_exists(
                Formula::make_exists(copy.var, Formula::make_not(copy.children[0])), g, opt));
        default: return std::make_shared<Formula>(std::move(copy));
    }
}

}  // namespace

FormulaPtr eliminate_all(const FormulaPtr& f, const GroupSpec& g, const QeOptions& opt) {
    g.require_computable("quantifier elimination");
    return eliminate_rec(expand_derived(f, g), g, opt);
}

AtomClass classify_atom(const FormulaPtr& atom, const GroupSpec& g) {
    if (atom->kind == K::cmp) return {AtomClass::Tag::order_convex, 0, 0};
    if (atom->kind != K::cong) throw domain_error("classify_atom expects a base atom");
    const StaircaseSubgroup& h = *atom->modulus;
    if (index_in_group(h).is_finite()) return {AtomClass::Tag::na, 0, 0};
    // the modulus cuts infinitely many cosets: report the first prime whose
    // contribution is infinite, and the convex part CS(zero prefix)
    std::size_t z = h.zero_prefix();
    for (std::size_t c = z + 1; c <= h.rank(); ++c)
        for (long long p : prime_factors(h.eff(c)))
            if (!g.component(c).dim_p(p).is_finite())
                return {AtomClass::Tag::congruence, p, z};
    // infinite index caused by the forced-zero prefix alone: tag by the
    // smallest prime with nonzero dimension in the pinned components
    for (std::size_t c = 1; c <= z; ++c)
        for (auto& [p, d] : g.component(c).dims.exceptions())
            if (d > ExtNat(0)) return {AtomClass::Tag::congruence, p, z};
    return {AtomClass::Tag::congruence, 2, z};
}

namespace {

void collect_atoms(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
    if (f->is_atom()) {
        if (f->kind != K::truth) out.push_back(f);
        return;
    }
    for (auto& c : f->children) collect_atoms(c, out);
}

}  // namespace

std::vector<DirectedFamily> directed_family_partition(const FormulaPtr& f, const GroupSpec& g) {
    std::vector<FormulaPtr> atoms;
    collect_atoms(f, atoms);
    std::vector<DirectedFamily> families;
    auto find_family = [&](bool order, long long p, std::size_t lvl) -> DirectedFamily& {
        for (auto& fam : families)
            if (fam.order == order && fam.p == p && fam.delta_level == lvl) return fam;
        families.push_back({order, p, lvl, {}});
        return families.back();
    };
    for (auto& a : atoms) {
        AtomClass cls = classify_atom(a, g);
        if (cls.tag == AtomClass::Tag::na) continue;
        if (cls.tag == AtomClass::Tag::order_convex) {
            find_family(true, 0, 0).atoms.push_back(a);
            continue;
        }
        // promote past components of finite p-dimension: those cosets only
        // refine each other by finite index and merge into one family
        std::size_t lvl = cls.delta_level;
        while (lvl > 0 && g.component(lvl).dim_p(cls.p).is_finite()) --lvl;
        find_family(false, cls.p, lvl).atoms.push_back(a);
    }
    return families;
}

}  // namespace oag
