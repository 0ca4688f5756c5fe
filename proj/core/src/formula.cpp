#include "oag/formula.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "oag/invariants.hpp"

namespace oag {

// ---------------------------------------------------------------- LinearTerm

namespace {
std::vector<Rational> pad_add(const std::vector<Rational>& a, const std::vector<Rational>& b,
                              long long bscale) {
    std::vector<Rational> out(std::max(a.size(), b.size()), Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i] * Rational(bscale);
    return out;
}
}  // namespace

void LinearTerm::prune() {
    for (auto it = coeffs_.begin(); it != coeffs_.end();)
        it = it->second == 0 ? coeffs_.erase(it) : std::next(it);
    for (auto it = ones_.begin(); it != ones_.end();)
        it = it->second == 0 ? ones_.erase(it) : std::next(it);
    bool zero = std::all_of(const_coords_.begin(), const_coords_.end(),
                            [](const Rational& q) { return q.is_zero(); });
    if (zero) const_coords_.clear();
}

long long LinearTerm::coeff_of(const std::string& v) const {
    auto it = coeffs_.find(v);
    return it == coeffs_.end() ? 0 : it->second;
}

LinearTerm LinearTerm::variable(const std::string& name, long long coeff) {
    LinearTerm t;
    if (coeff != 0) t.coeffs_[name] = coeff;
    return t;
}

LinearTerm LinearTerm::constant(const GroupElement& e) {
    LinearTerm t;
    t.const_coords_ = e.coords();
    t.prune();
    return t;
}

LinearTerm LinearTerm::constant(std::vector<Rational> coords) {
    LinearTerm t;
    t.const_coords_ = std::move(coords);
    t.prune();
    return t;
}

LinearTerm LinearTerm::one_at(std::size_t level, long long coeff) {
    LinearTerm t;
    if (coeff != 0) t.ones_[level] = coeff;
    return t;
}

LinearTerm operator+(const LinearTerm& a, const LinearTerm& b) {
    LinearTerm t = a;
    for (auto& [v, c] : b.coeffs_) t.coeffs_[v] += c;
    for (auto& [l, c] : b.ones_) t.ones_[l] += c;
    t.const_coords_ = pad_add(t.const_coords_, b.const_coords_, 1);
    t.prune();
    return t;
}

LinearTerm operator-(const LinearTerm& a, const LinearTerm& b) { return a + b.scaled(-1); }

LinearTerm LinearTerm::operator-() const { return scaled(-1); }

LinearTerm LinearTerm::scaled(long long n) const {
    LinearTerm t;
    if (n == 0) return t;
    for (auto& [v, c] : coeffs_) t.coeffs_[v] = c * n;
    for (auto& [l, c] : ones_) t.ones_[l] = c * n;
    for (auto& q : const_coords_) t.const_coords_.push_back(q * Rational(n));
    t.prune();
    return t;
}

LinearTerm LinearTerm::substituted(const std::string& v, const LinearTerm& s) const {
    long long c = coeff_of(v);
    if (c == 0) return *this;
    return without_variable(v) + s.scaled(c);
}

LinearTerm LinearTerm::without_variable(const std::string& v) const {
    LinearTerm t = *this;
    t.coeffs_.erase(v);
    return t;
}

GroupElement LinearTerm::evaluate(const GroupSpec& g,
                                  const std::map<std::string, GroupElement>& assignment) const {
    GroupElement acc = GroupElement::zero(g);
    for (auto& [v, c] : coeffs_) {
        auto it = assignment.find(v);
        if (it == assignment.end()) throw domain_error("no value for variable " + v);
        acc = add(g, acc, scalar_mul(g, c, it->second));
    }
    for (auto& [l, c] : ones_) {
        if (l < 1 || l > g.rank() || !g.component(l).discrete)
            throw domain_error("one@" + std::to_string(l) + " needs a discrete component at level " +
                               std::to_string(l));
        acc = add(g, acc, scalar_mul(g, c, GroupElement::unit(g, l)));
    }
    if (!const_coords_.empty()) {
        std::vector<Rational> coords = const_coords_;
        coords.resize(g.rank(), Rational(0));
        acc = add(g, acc, GroupElement(g, std::move(coords)));
    }
    return acc;
}

bool LinearTerm::operator==(const LinearTerm& o) const {
    return coeffs_ == o.coeffs_ && ones_ == o.ones_ &&
           pad_add(const_coords_, o.const_coords_, -1) ==
               std::vector<Rational>(std::max(const_coords_.size(), o.const_coords_.size()),
                                     Rational(0));
}

std::string LinearTerm::str() const {
    std::ostringstream os;
    bool first = true;
    auto sign = [&](long long c) {
        if (first) {
            if (c < 0) os << "-";
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        first = false;
        return c < 0 ? -c : c;
    };
    for (auto& [v, c] : coeffs_) {
        long long a = sign(c);
        if (a != 1) os << a << "*";
        os << v;
    }
    for (auto& [l, c] : ones_) {
        long long a = sign(c);
        if (a != 1) os << a << "*";
        os << "one@" << l;
    }
    if (!const_coords_.empty()) {
        if (!first) os << " + ";
        first = false;
        os << "(";
        for (std::size_t i = 0; i < const_coords_.size(); ++i) {
            if (i) os << ",";
            os << const_coords_[i].str();
        }
        os << ")";
    }
    if (first) os << "0";
    return os.str();
}

// ------------------------------------------------------------------- Formula

namespace {
FormulaPtr node(Formula f) { return std::make_shared<Formula>(std::move(f)); }
}  // namespace

FormulaPtr Formula::truth_value(bool b) {
    Formula f;
    f.kind = Kind::truth;
    f.n = b ? 1 : 0;
    return node(std::move(f));
}

FormulaPtr Formula::make_cmp(LinearTerm lhs, Rel rel, LinearTerm rhs) {
    Formula f;
    f.kind = Kind::cmp;
    f.lhs = std::move(lhs);
    f.rel = rel;
    f.rhs = std::move(rhs);
    return node(std::move(f));
}

FormulaPtr Formula::make_cong(LinearTerm lhs, LinearTerm rhs, StaircaseSubgroup modulus) {
    if (modulus.is_whole_group()) return truth_value(true);
    Formula f;
    f.kind = Kind::cong;
    f.lhs = std::move(lhs);
    f.rhs = std::move(rhs);
    f.modulus = std::move(modulus);
    return node(std::move(f));
}

FormulaPtr Formula::make_an_eq(long long n, LinearTerm t, std::size_t level) {
    if (n < 2) throw domain_error("A_n needs n >= 2");
    Formula f;
    f.kind = Kind::an_eq;
    f.n = n;
    f.lhs = std::move(t);
    f.level = level;
    return node(std::move(f));
}

FormulaPtr Formula::make_fn_eq(long long n, LinearTerm t, std::size_t level) {
    if (n < 2) throw domain_error("F_n needs n >= 2");
    Formula f;
    f.kind = Kind::fn_eq;
    f.n = n;
    f.lhs = std::move(t);
    f.level = level;
    return node(std::move(f));
}

FormulaPtr Formula::make_m_k(long long k, LinearTerm t) {
    if (k <= 0) throw domain_error("M_k needs k > 0");
    Formula f;
    f.kind = Kind::m_k;
    f.k = k;
    f.lhs = std::move(t);
    return node(std::move(f));
}

FormulaPtr Formula::make_e_nk(long long n, long long k, LinearTerm t) {
    if (n < 2 || k <= 0) throw domain_error("E_(n,k) needs n >= 2 and k > 0");
    Formula f;
    f.kind = Kind::e_nk;
    f.n = n;
    f.k = k;
    f.lhs = std::move(t);
    return node(std::move(f));
}

FormulaPtr Formula::make_d_pri(long long p, long long r, long long i, LinearTerm t) {
    if (!is_prime(p) || r < 1 || i <= 0 || i >= r)
        throw domain_error("D_(p,r,i) needs p prime and 0 < i < r");
    Formula f;
    f.kind = Kind::d_pri;
    f.p = p;
    f.r = r;
    f.i = i;
    f.lhs = std::move(t);
    return node(std::move(f));
}

FormulaPtr Formula::make_not(FormulaPtr c) {
    if (c->kind == Kind::truth) return truth_value(!c->is_true());
    if (c->kind == Kind::f_not) return c->children[0];
    Formula f;
    f.kind = Kind::f_not;
    f.children.push_back(std::move(c));
    return node(std::move(f));
}

namespace {
FormulaPtr make_nary(Formula::Kind kind, std::vector<FormulaPtr> children, bool unit) {
    std::vector<FormulaPtr> flat;
    for (auto& c : children) {
        if (c->kind == kind) {
            flat.insert(flat.end(), c->children.begin(), c->children.end());
        } else if (c->kind == Formula::Kind::truth) {
            if (c->is_true() != unit) return Formula::truth_value(!unit);
        } else {
            flat.push_back(std::move(c));
        }
    }
    if (flat.empty()) return Formula::truth_value(unit);
    if (flat.size() == 1) return flat[0];
    Formula f;
    f.kind = kind;
    f.children = std::move(flat);
    return node(std::move(f));
}
}  // namespace

FormulaPtr Formula::make_and(std::vector<FormulaPtr> children) {
    return make_nary(Kind::f_and, std::move(children), true);
}

FormulaPtr Formula::make_or(std::vector<FormulaPtr> children) {
    return make_nary(Kind::f_or, std::move(children), false);
}

FormulaPtr Formula::make_exists(std::string var, FormulaPtr body) {
    Formula f;
    f.kind = Kind::exists;
    f.var = std::move(var);
    f.children.push_back(std::move(body));
    return node(std::move(f));
}

FormulaPtr Formula::make_forall(std::string var, FormulaPtr body) {
    Formula f;
    f.kind = Kind::forall;
    f.var = std::move(var);
    f.children.push_back(std::move(body));
    return node(std::move(f));
}

bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a->kind != b->kind) return false;
    if (!(a->lhs == b->lhs) || !(a->rhs == b->rhs)) return false;
    if (a->rel != b->rel || a->n != b->n || a->k != b->k || a->p != b->p || a->r != b->r ||
        a->i != b->i || a->level != b->level || a->var != b->var)
        return false;
    if (a->modulus.has_value() != b->modulus.has_value()) return false;
    if (a->modulus && !(*a->modulus == *b->modulus)) return false;
    if (a->children.size() != b->children.size()) return false;
    for (std::size_t j = 0; j < a->children.size(); ++j)
        if (!structurally_equal(a->children[j], b->children[j])) return false;
    return true;
}

bool has_quantifiers(const FormulaPtr& f) {
    if (f->kind == Formula::Kind::exists || f->kind == Formula::Kind::forall) return true;
    return std::any_of(f->children.begin(), f->children.end(),
                       [](const FormulaPtr& c) { return has_quantifiers(c); });
}

bool has_derived_atoms(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::an_eq:
        case Formula::Kind::fn_eq:
        case Formula::Kind::m_k:
        case Formula::Kind::e_nk:
        case Formula::Kind::d_pri: return true;
        default: break;
    }
    return std::any_of(f->children.begin(), f->children.end(),
                       [](const FormulaPtr& c) { return has_derived_atoms(c); });
}

namespace {
void collect_free(const FormulaPtr& f, std::set<std::string>& bound, std::set<std::string>& out) {
    for (auto& [v, c] : f->lhs.coeffs())
        if (!bound.count(v)) out.insert(v), (void)c;
    for (auto& [v, c] : f->rhs.coeffs())
        if (!bound.count(v)) out.insert(v), (void)c;
    bool binds = f->kind == Formula::Kind::exists || f->kind == Formula::Kind::forall;
    bool newly = binds && !bound.count(f->var);
    if (newly) bound.insert(f->var);
    for (auto& c : f->children) collect_free(c, bound, out);
    if (newly) bound.erase(f->var);
}
}  // namespace

std::vector<std::string> free_variables(const FormulaPtr& f) {
    std::set<std::string> bound, out;
    collect_free(f, bound, out);
    return {out.begin(), out.end()};
}

FormulaPtr substitute(const FormulaPtr& f, const std::string& var, const LinearTerm& t) {
    if ((f->kind == Formula::Kind::exists || f->kind == Formula::Kind::forall) && f->var == var)
        return f;
    Formula g = *f;
    g.lhs = f->lhs.substituted(var, t);
    g.rhs = f->rhs.substituted(var, t);
    g.children.clear();
    for (auto& c : f->children) g.children.push_back(substitute(c, var, t));
    return node(std::move(g));
}

// ---------------------------------------------------------------- evaluation

namespace {

std::optional<std::size_t> level_of(const std::optional<ConvexSubgroup>& c) {
    if (!c) return std::nullopt;
    return c->level();
}

// g ∈ CS(level) + nG, decided through F_n: the leading obstruction to
// n-divisibility must lie strictly below `level`.
bool in_convex_plus_n(const GroupSpec& g, const GroupElement& x, std::size_t level, long long n) {
    auto f = F_n_of(g, x, n);
    return !f || f->level() > level;
}

}  // namespace

bool evaluate(const FormulaPtr& f, const GroupSpec& g,
              const std::map<std::string, GroupElement>& assignment) {
    switch (f->kind) {
        case Formula::Kind::truth: return f->is_true();
        case Formula::Kind::cmp: {
            int c = compare(f->lhs.evaluate(g, assignment), f->rhs.evaluate(g, assignment));
            return f->rel == Rel::eq ? c == 0 : (f->rel == Rel::le ? c <= 0 : c < 0);
        }
        case Formula::Kind::cong: {
            GroupElement d = sub(g, f->lhs.evaluate(g, assignment), f->rhs.evaluate(g, assignment));
            return contains(*f->modulus, d);
        }
        case Formula::Kind::an_eq: {
            auto a = A_n_of(g, f->lhs.evaluate(g, assignment), f->n);
            return level_of(a) == std::optional<std::size_t>(f->level);
        }
        case Formula::Kind::fn_eq: {
            auto fn = F_n_of(g, f->lhs.evaluate(g, assignment), f->n);
            return level_of(fn) == std::optional<std::size_t>(f->level);
        }
        case Formula::Kind::m_k: {
            GroupElement x = f->lhs.evaluate(g, assignment);
            auto lead = x.leading_index();
            return lead && g.component(*lead).discrete && x.coord(*lead) == Rational(f->k);
        }
        case Formula::Kind::e_nk: {
            GroupElement x = f->lhs.evaluate(g, assignment);
            auto jumps = regular_jumps(g, f->n);
            for (std::size_t l = 1; l <= g.rank(); ++l) {
                if (!g.component(l).discrete) continue;
                // successor of D_l in RJ_n (discrete quotients are jumps)
                std::size_t succ = 0;
                for (auto& j : jumps)
                    if (j.level() < l) succ = std::max(succ, j.level());
                GroupElement shifted = sub(g, x, scalar_mul(g, f->k, GroupElement::unit(g, l)));
                if (in_convex_plus_n(g, x, succ, f->n) && in_convex_plus_n(g, shifted, l, f->n))
                    return true;
            }
            return false;
        }
        case Formula::Kind::d_pri: {
            GroupElement x = f->lhs.evaluate(g, assignment);
            long long pr = 1;
            for (long long j = 0; j < f->r; ++j) pr *= f->p;
            auto fg = F_n_of(g, x, pr);
            if (!fg) return true;  // x ∈ p^r G
            long long pri = 1;
            for (long long j = 0; j < f->r - f->i; ++j) pri *= f->p;
            auto fh = F_n_of(g, scalar_mul(g, pri, x), pr);
            return !fh || fh->level() > fg->level();
        }
        case Formula::Kind::f_not: return !evaluate(f->children[0], g, assignment);
        case Formula::Kind::f_and:
            return std::all_of(f->children.begin(), f->children.end(),
                               [&](const FormulaPtr& c) { return evaluate(c, g, assignment); });
        case Formula::Kind::f_or:
            return std::any_of(f->children.begin(), f->children.end(),
                               [&](const FormulaPtr& c) { return evaluate(c, g, assignment); });
        case Formula::Kind::exists:
        case Formula::Kind::forall:
            throw domain_error("direct evaluation needs a quantifier-free formula");
    }
    throw domain_error("bad formula node");
}

// ------------------------------------------------------------------ printing

namespace {

int precedence(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::exists:
        case Formula::Kind::forall: return 0;
        case Formula::Kind::f_or: return 1;
        case Formula::Kind::f_and: return 2;
        case Formula::Kind::f_not: return 3;
        default: return 4;
    }
}

void print_into(const FormulaPtr& f, std::ostringstream& os);

void print_child(const FormulaPtr& c, int min_prec, std::ostringstream& os) {
    if (precedence(c) < min_prec) {
        os << "(";
        print_into(c, os);
        os << ")";
    } else {
        print_into(c, os);
    }
}

void print_into(const FormulaPtr& f, std::ostringstream& os) {
    switch (f->kind) {
        case Formula::Kind::truth: os << (f->is_true() ? "true" : "false"); return;
        case Formula::Kind::cmp:
            os << f->lhs.str() << (f->rel == Rel::le ? " <= " : f->rel == Rel::lt ? " < " : " = ")
               << f->rhs.str();
            return;
        case Formula::Kind::cong:
            os << f->lhs.str() << " == " << f->rhs.str() << " mod " << f->modulus->str();
            return;
        case Formula::Kind::an_eq:
            os << "An[" << f->n << "](" << f->lhs.str() << ") = D" << f->level;
            return;
        case Formula::Kind::fn_eq:
            os << "Fn[" << f->n << "](" << f->lhs.str() << ") = D" << f->level;
            return;
        case Formula::Kind::m_k: os << "M[" << f->k << "](" << f->lhs.str() << ")"; return;
        case Formula::Kind::e_nk:
            os << "E[" << f->n << "," << f->k << "](" << f->lhs.str() << ")";
            return;
        case Formula::Kind::d_pri:
            os << "D[" << f->p << "," << f->r << "," << f->i << "](" << f->lhs.str() << ")";
            return;
        case Formula::Kind::f_not:
            os << "not ";
            print_child(f->children[0], 4, os);
            return;
        case Formula::Kind::f_and:
            for (std::size_t j = 0; j < f->children.size(); ++j) {
                if (j) os << " and ";
                print_child(f->children[j], 3, os);
            }
            return;
        case Formula::Kind::f_or:
            for (std::size_t j = 0; j < f->children.size(); ++j) {
                if (j) os << " or ";
                print_child(f->children[j], 2, os);
            }
            return;
        case Formula::Kind::exists:
        case Formula::Kind::forall:
            os << (f->kind == Formula::Kind::exists ? "exists " : "forall ") << f->var << ". ";
            print_into(f->children[0], os);
            return;
    }
}

}  // namespace

std::string print(const FormulaPtr& f) {
    std::ostringstream os;
    print_into(f, os);
    return os.str();
}

// ------------------------------------------------------------------- parsing

namespace {

struct Token {
    enum class Kind { ident, number, sym, end };
    Kind kind;
    std::string text;
    std::size_t offset;
};

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (std::isspace((unsigned char)s[i])) { ++i; continue; }
        std::size_t start = i;
        if (std::isalpha((unsigned char)s[i])) {
            while (i < s.size() && (std::isalnum((unsigned char)s[i]) || s[i] == '_')) ++i;
            out.push_back({Token::Kind::ident, s.substr(start, i - start), start});
        } else if (std::isdigit((unsigned char)s[i])) {
            while (i < s.size() && std::isdigit((unsigned char)s[i])) ++i;
            out.push_back({Token::Kind::number, s.substr(start, i - start), start});
        } else {
            static const char* two[] = {"<=", "==", "->"};
            std::string t;
            for (auto* w : two)
                if (s.compare(i, 2, w) == 0) { t = w; break; }
            if (t.empty()) t = s.substr(i, 1);
            if (std::string("()[],.*+-/@<=").find(t[0]) == std::string::npos)
                throw parse_error("unexpected character '" + t + "'", i);
            i += t.size();
            out.push_back({Token::Kind::sym, t, start});
        }
    }
    out.push_back({Token::Kind::end, "", s.size()});
    return out;
}

const std::set<std::string> kKeywords = {"exists", "forall", "and", "or", "not",
                                         "mod",    "true",   "false", "one"};

class Parser {
public:
    Parser(std::vector<Token> tokens, const GroupSpec& g) : toks_(std::move(tokens)), g_(g) {}

    FormulaPtr formula() {
        FormulaPtr f = quantified();
        expect_end();
        return f;
    }

    StaircaseSubgroup subgroup_only() {
        StaircaseSubgroup h = subgroup();
        expect_end();
        return h;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    const GroupSpec& g_;

    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    Token take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
    bool at_sym(const std::string& s) const {
        return peek().kind == Token::Kind::sym && peek().text == s;
    }
    bool at_ident(const std::string& s) const {
        return peek().kind == Token::Kind::ident && peek().text == s;
    }
    void expect_sym(const std::string& s) {
        if (!at_sym(s)) throw parse_error("expected '" + s + "'", peek().offset);
        take();
    }
    void expect_ident(const std::string& s) {
        if (!at_ident(s)) throw parse_error("expected '" + s + "'", peek().offset);
        take();
    }
    void expect_end() {
        if (peek().kind != Token::Kind::end)
            throw parse_error("unexpected trailing input '" + peek().text + "'", peek().offset);
    }
    long long number() {
        if (peek().kind != Token::Kind::number)
            throw parse_error("expected a number", peek().offset);
        return std::stoll(take().text);
    }

    FormulaPtr quantified() {
        if (at_ident("exists") || at_ident("forall")) {
            bool ex = take().text == "exists";
            std::string v = variable_name();
            expect_sym(".");
            FormulaPtr body = quantified();
            return ex ? Formula::make_exists(v, body) : Formula::make_forall(v, body);
        }
        FormulaPtr a = disjunction();
        if (at_sym("->")) {
            take();
            FormulaPtr b = quantified();
            return Formula::make_or({Formula::make_not(a), b});
        }
        return a;
    }

    FormulaPtr disjunction() {
        std::vector<FormulaPtr> cs{conjunction()};
        while (at_ident("or")) { take(); cs.push_back(conjunction()); }
        return cs.size() == 1 ? cs[0] : Formula::make_or(std::move(cs));
    }

    FormulaPtr conjunction() {
        std::vector<FormulaPtr> cs{unary()};
        while (at_ident("and")) { take(); cs.push_back(unary()); }
        return cs.size() == 1 ? cs[0] : Formula::make_and(std::move(cs));
    }

    FormulaPtr unary() {
        if (at_ident("not")) { take(); return Formula::make_not(unary()); }
        if (at_ident("true")) { take(); return Formula::truth_value(true); }
        if (at_ident("false")) { take(); return Formula::truth_value(false); }
        if (peek().kind == Token::Kind::ident && peek(1).kind == Token::Kind::sym &&
            peek(1).text == "[") {
            const std::string& w = peek().text;
            if (w == "An" || w == "Fn" || w == "M" || w == "E" || w == "D") return derived();
        }
        if (at_sym("(")) {
            // Could be a parenthesized formula or an element literal starting
            // an atom; try the atom first and fall back.
            std::size_t save = pos_;
            try {
                return atom();
            } catch (const parse_error&) {
                pos_ = save;
            }
            take();
            FormulaPtr f = quantified();
            expect_sym(")");
            return f;
        }
        return atom();
    }

    FormulaPtr derived() {
        std::string w = take().text;
        expect_sym("[");
        std::vector<long long> args{number()};
        while (at_sym(",")) { take(); args.push_back(number()); }
        expect_sym("]");
        expect_sym("(");
        LinearTerm t = term();
        expect_sym(")");
        std::size_t off = peek().offset;
        auto need = [&](std::size_t n) {
            if (args.size() != n)
                throw parse_error(w + " takes " + std::to_string(n) + " bracket arguments", off);
        };
        if (w == "An" || w == "Fn") {
            need(1);
            expect_sym("=");
            std::size_t lvl = d_level();
            return w == "An" ? Formula::make_an_eq(args[0], t, lvl)
                             : Formula::make_fn_eq(args[0], t, lvl);
        }
        if (w == "M") { need(1); return Formula::make_m_k(args[0], t); }
        if (w == "E") { need(2); return Formula::make_e_nk(args[0], args[1], t); }
        need(3);
        return Formula::make_d_pri(args[0], args[1], args[2], t);
    }

    FormulaPtr atom() {
        LinearTerm lhs = term();
        if (at_sym("<=") || at_sym("<") || at_sym("=")) {
            std::string op = take().text;
            LinearTerm rhs = term();
            Rel r = op == "<=" ? Rel::le : (op == "<" ? Rel::lt : Rel::eq);
            return Formula::make_cmp(lhs, r, rhs);
        }
        if (at_sym("==")) {
            take();
            LinearTerm rhs = term();
            expect_ident("mod");
            return Formula::make_cong(lhs, rhs, subgroup());
        }
        throw parse_error("expected a relation after term", peek().offset);
    }

    std::string variable_name() {
        if (peek().kind != Token::Kind::ident || kKeywords.count(peek().text) ||
            !std::islower((unsigned char)peek().text[0]))
            throw parse_error("expected a variable name", peek().offset);
        return take().text;
    }

    LinearTerm term() {
        LinearTerm t = addend(leading_sign());
        while (at_sym("+") || at_sym("-")) {
            long long s = take().text == "-" ? -1 : 1;
            t = t + addend(s);
        }
        return t;
    }

    long long leading_sign() {
        if (at_sym("-")) { take(); return -1; }
        return 1;
    }

    LinearTerm addend(long long sign) {
        if (peek().kind == Token::Kind::number) {
            long long n = number();
            if (at_sym("*")) {
                take();
                return factor().scaled(sign * n);
            }
            if (n == 0) return LinearTerm();
            throw parse_error("bare integers are not group terms (use element literals)",
                              peek().offset);
        }
        return factor().scaled(sign);
    }

    LinearTerm factor() {
        if (at_ident("one")) {
            take();
            expect_sym("@");
            return LinearTerm::one_at((std::size_t)number());
        }
        if (peek().kind == Token::Kind::ident) return LinearTerm::variable(variable_name());
        if (at_sym("(")) return LinearTerm::constant(element_literal());
        throw parse_error("expected a term", peek().offset);
    }

    GroupElement element_literal() {
        expect_sym("(");
        std::vector<Rational> coords{rational()};
        while (at_sym(",")) { take(); coords.push_back(rational()); }
        std::size_t off = peek().offset;
        expect_sym(")");
        if (coords.size() != g_.rank())
            throw parse_error("element literal has " + std::to_string(coords.size()) +
                                  " coordinates, group has rank " + std::to_string(g_.rank()),
                              off);
        try {
            return GroupElement(g_, std::move(coords));
        } catch (const domain_error& e) {
            throw parse_error(e.what(), off);
        }
    }

    Rational rational() {
        long long s = leading_sign();
        long long num = number();
        long long den = 1;
        if (at_sym("/")) { take(); den = number(); }
        return Rational(s * num, den);
    }

    std::size_t d_level() {
        if (peek().kind == Token::Kind::ident && peek().text.size() > 1 &&
            peek().text[0] == 'D' &&
            std::all_of(peek().text.begin() + 1, peek().text.end(),
                        [](char c) { return std::isdigit((unsigned char)c); })) {
            return (std::size_t)std::stoll(take().text.substr(1));
        }
        throw parse_error("expected a convex subgroup D<level>", peek().offset);
    }

    StaircaseSubgroup subgroup() {
        std::size_t off = peek().offset;
        try {
            if (at_ident("G")) {
                take();
                return StaircaseSubgroup::multiple_of_group(g_, 1);
            }
            if (at_ident("stair")) return stair();
            if (peek().kind == Token::Kind::number) {
                long long n = number();
                expect_ident("G");
                return StaircaseSubgroup::multiple_of_group(g_, n);
            }
            std::size_t lvl = d_level();
            if (at_sym("+")) {
                take();
                long long n = number();
                expect_ident("G");
                return StaircaseSubgroup::convex_plus(g_, ConvexSubgroup(g_, lvl), n);
            }
            return StaircaseSubgroup::convex(g_, ConvexSubgroup(g_, lvl));
        } catch (const domain_error& e) {
            throw parse_error(e.what(), off);
        }
    }

    StaircaseSubgroup stair() {
        expect_ident("stair");
        expect_sym("[");
        std::vector<StaircaseSubgroup::Term> terms;
        long long tail = 0;
        bool first = true;
        while (true) {
            long long mult = 1;
            if (!first || peek().kind == Token::Kind::number) {
                mult = number();
                expect_sym("*");
            }
            if (at_ident("G")) {
                take();
                tail = mult;
            } else {
                terms.push_back({mult, d_level()});
            }
            first = false;
            if (!at_sym(",")) break;
            take();
        }
        expect_sym("]");
        return StaircaseSubgroup::from_terms(g_, terms, tail);
    }
};

}  // namespace

FormulaPtr parse_formula(const std::string& text, const GroupSpec& g) {
    return Parser(lex(text), g).formula();
}

StaircaseSubgroup parse_subgroup(const std::string& text, const GroupSpec& g) {
    return Parser(lex(text), g).subgroup_only();
}

// ------------------------------------------------------------------ rewrites

namespace {

long long vp_of(long long n, long long p) {
    long long e = 0;
    while (n % p == 0) { n /= p; ++e; }
    return e;
}

FormulaPtr rewrite_children(const FormulaPtr& f, FormulaPtr (*fn)(const FormulaPtr&)) {
    Formula g = *f;
    g.children.clear();
    for (auto& c : f->children) g.children.push_back(fn(c));
    return std::make_shared<Formula>(std::move(g));
}

}  // namespace

FormulaPtr expand_composite_modulus(const FormulaPtr& f) {
    if (f->kind != Formula::Kind::cong) {
        if (f->children.empty()) return f;
        return rewrite_children(f, &expand_composite_modulus);
    }
    const StaircaseSubgroup& h = *f->modulus;
    std::set<long long> primes;
    for (std::size_t c = 1; c <= h.rank(); ++c)
        for (long long p : prime_factors(h.eff(c))) primes.insert(p);
    if (primes.size() <= 1) return f;
    // Split per prime: the p-component keeps the forced-zero coordinates and
    // the p-power part of every effective modulus.
    std::vector<FormulaPtr> parts;
    for (long long p : primes) {
        std::vector<long long> eff;
        for (std::size_t c = 1; c <= h.rank(); ++c) {
            long long m = h.eff(c);
            long long pe = 1;
            if (m == 0) { eff.push_back(0); continue; }
            for (long long e = vp_of(m, p); e > 0; --e) pe *= p;
            eff.push_back(pe);
        }
        parts.push_back(Formula::make_cong(f->lhs, f->rhs,
                                           StaircaseSubgroup::from_effective_moduli(h.group(), eff)));
    }
    return Formula::make_and(std::move(parts));
}

namespace {

// Level of the successor of D_level inside the jump chain, 0 meaning G.
std::size_t successor_level(const std::vector<ConvexSubgroup>& jumps, std::size_t level) {
    std::size_t succ = 0;
    for (auto& j : jumps)
        if (j.level() < level) succ = std::max(succ, j.level());
    return succ;
}

bool is_jump(const std::vector<ConvexSubgroup>& jumps, std::size_t level) {
    return std::any_of(jumps.begin(), jumps.end(),
                       [&](const ConvexSubgroup& j) { return j.level() == level; });
}

std::vector<std::size_t> discrete_levels(const GroupSpec& g) {
    std::vector<std::size_t> out;
    for (std::size_t l = 1; l <= g.rank(); ++l)
        if (g.component(l).discrete) out.push_back(l);
    return out;
}

FormulaPtr cong0(const LinearTerm& t, StaircaseSubgroup h) {
    return Formula::make_cong(t, LinearTerm(), std::move(h));
}

}  // namespace

FormulaPtr expand_derived(const FormulaPtr& f, const GroupSpec& g) {
    switch (f->kind) {
        case Formula::Kind::an_eq: {
            auto jumps = regular_jumps(g, f->n);
            if (!is_jump(jumps, f->level)) return Formula::truth_value(false);
            std::size_t succ = successor_level(jumps, f->level);
            std::vector<FormulaPtr> parts;
            parts.push_back(Formula::make_not(
                cong0(f->lhs, StaircaseSubgroup::convex(g, ConvexSubgroup(g, f->level)))));
            if (succ > 0)
                parts.push_back(
                    cong0(f->lhs, StaircaseSubgroup::convex(g, ConvexSubgroup(g, succ))));
            return Formula::make_and(std::move(parts));
        }
        case Formula::Kind::fn_eq: {
            auto jumps = regular_jumps(g, f->n);
            if (!is_jump(jumps, f->level)) return Formula::truth_value(false);
            std::size_t succ = successor_level(jumps, f->level);
            std::vector<FormulaPtr> parts;
            parts.push_back(Formula::make_not(cong0(
                f->lhs, StaircaseSubgroup::convex_plus(g, ConvexSubgroup(g, f->level), f->n))));
            if (succ > 0)
                parts.push_back(cong0(
                    f->lhs, StaircaseSubgroup::convex_plus(g, ConvexSubgroup(g, succ), f->n)));
            return Formula::make_and(std::move(parts));
        }
        case Formula::Kind::m_k: {
            std::vector<FormulaPtr> parts;
            for (std::size_t l : discrete_levels(g))
                parts.push_back(Formula::make_cong(
                    f->lhs, LinearTerm::one_at(l, f->k),
                    StaircaseSubgroup::convex(g, ConvexSubgroup(g, l))));
            return Formula::make_or(std::move(parts));
        }
        case Formula::Kind::e_nk: {
            auto jumps = regular_jumps(g, f->n);
            std::vector<FormulaPtr> parts;
            for (std::size_t l : discrete_levels(g)) {
                std::size_t succ = successor_level(jumps, l);
                std::vector<FormulaPtr> conj;
                if (succ > 0)
                    conj.push_back(cong0(
                        f->lhs, StaircaseSubgroup::convex_plus(g, ConvexSubgroup(g, succ), f->n)));
                conj.push_back(Formula::make_cong(
                    f->lhs, LinearTerm::one_at(l, f->k),
                    StaircaseSubgroup::convex_plus(g, ConvexSubgroup(g, l), f->n)));
                parts.push_back(Formula::make_and(std::move(conj)));
            }
            return Formula::make_or(std::move(parts));
        }
        case Formula::Kind::d_pri: {
            auto jumps = regular_jumps(g, f->p);
            long long pr = 1, pi = 1;
            for (long long j = 0; j < f->r; ++j) pr *= f->p;
            for (long long j = 0; j < f->i; ++j) pi *= f->p;
            std::vector<FormulaPtr> parts;
            parts.push_back(cong0(f->lhs, StaircaseSubgroup::multiple_of_group(g, pr)));
            for (std::size_t l : discrete_levels(g)) {
                std::size_t succ = successor_level(jumps, l);
                std::vector<FormulaPtr> conj;
                conj.push_back(cong0(
                    f->lhs, StaircaseSubgroup::convex_plus(g, ConvexSubgroup(g, l), pi)));
                if (succ > 0)
                    conj.push_back(cong0(
                        f->lhs, StaircaseSubgroup::convex_plus(g, ConvexSubgroup(g, succ), pr)));
                conj.push_back(Formula::make_not(cong0(
                    f->lhs, StaircaseSubgroup::convex_plus(g, ConvexSubgroup(g, l), pr))));
                parts.push_back(Formula::make_and(std::move(conj)));
            }
            return Formula::make_or(std::move(parts));
        }
        default: {
            if (f->children.empty()) return f;
            Formula out = *f;
            out.children.clear();
            for (auto& c : f->children) out.children.push_back(expand_derived(c, g));
            if (out.kind == Formula::Kind::f_and) return Formula::make_and(std::move(out.children));
            if (out.kind == Formula::Kind::f_or) return Formula::make_or(std::move(out.children));
            if (out.kind == Formula::Kind::f_not) return Formula::make_not(out.children[0]);
            return std::make_shared<Formula>(std::move(out));
        }
    }
}

}  // namespace oag
