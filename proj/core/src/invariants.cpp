#include "oag/invariants.hpp"

#include <algorithm>
#include <set>

namespace oag {

namespace {

bool tower_divisible_at(const ArchComponent& tower, long long p) {
    return tower.dim_p(p) == ExtNat(0);
}

// Primes p at which some component (or the tower) can have an infinite
// p-dimension exception. Defaults of infinity are handled by classify().
std::set<long long> infinite_exception_primes(const GroupSpec& g) {
    std::set<long long> out;
    auto scan = [&](const ArchComponent& c) {
        for (auto& [p, d] : c.dims.exceptions())
            if (d.is_infinite()) out.insert(p);
    };
    for (const auto& c : g.components()) scan(c);
    if (g.omega_tower()) scan(*g.omega_tower());
    return out;
}

}  // namespace

ExtNat dim_p(const GroupSpec& g, long long p) {
    ExtNat d(0);
    for (const auto& c : g.components()) d += c.dim_p(p);
    if (g.omega_tower() && !tower_divisible_at(*g.omega_tower(), p))
        return ExtNat::infinity();  // infinitely many copies, each contributing
    return d;
}

ExtNat dim_p_quotient(const GroupSpec& g, long long p, std::size_t top_level,
                      std::size_t bottom_level) {
    if (top_level > bottom_level || bottom_level > g.rank())
        throw domain_error("dim_p_quotient: bad level pair");
    ExtNat d(0);
    for (std::size_t c = top_level + 1; c <= bottom_level; ++c)
        d += g.component(c).dim_p(p);
    return d;
}

namespace {

// RJ_p as a descending list of levels (ascending subgroups).
std::vector<std::size_t> jump_levels_for_prime(const GroupSpec& g, long long p) {
    if (g.omega_tower() && !tower_divisible_at(*g.omega_tower(), p))
        throw domain_error("regular jumps at " + std::to_string(p) +
                           " are unbounded (omega tower is not p-divisible)");
    std::set<std::size_t> levels;
    std::size_t k = g.rank();
    for (std::size_t i = 1; i <= k; ++i) {
        // A_p of an element with leading coordinate i: the first component
        // at or below i with positive p-dimension bounds the p-regular part.
        std::size_t j = k;
        for (std::size_t m = i; m <= k; ++m)
            if (g.component(m).dim_p(p) != ExtNat(0)) { j = m; break; }
        levels.insert(j);
    }
    return {levels.rbegin(), levels.rend()};
}

}  // namespace

std::vector<ConvexSubgroup> regular_jumps(const GroupSpec& g, long long n) {
    if (n < 0) n = -n;
    if (n == 0) throw domain_error("regular jumps need n != 0");
    if (g.trivial()) return {};
    if (n == 1) {
        // Everything is 1-divisible, so A_1(x) = {0} for every x.
        if (g.omega_tower()) throw domain_error("regular jumps need a finite-rank spec for n = 1");
        return {ConvexSubgroup(g, g.rank())};
    }
    std::set<std::size_t> levels;
    for (long long p : prime_factors(n)) {
        auto lv = jump_levels_for_prime(g, p);
        levels.insert(lv.begin(), lv.end());
    }
    std::vector<ConvexSubgroup> out;
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) out.emplace_back(g, *it);
    return out;
}

std::vector<ConvexSubgroup> infinite_jumps(const GroupSpec& g, long long p) {
    if (!is_prime(p)) throw domain_error("infinite jumps need a prime");
    if (g.trivial()) return {};
    auto levels = jump_levels_for_prime(g, p);  // descending levels
    std::vector<ConvexSubgroup> out;
    for (std::size_t j = 0; j < levels.size(); ++j) {
        // Successor jump (next bigger subgroup = previous entry), or G.
        std::size_t upper = (j + 1 < levels.size()) ? levels[j + 1] : 0;
        if (dim_p_quotient(g, p, upper, levels[j]).is_infinite())
            out.emplace_back(g, levels[j]);
    }
    return out;
}

std::string kind_name(GroupKind k) {
    switch (k) {
        case GroupKind::trivial: return "trivial";
        case GroupKind::dp_minimal: return "dp_minimal";
        case GroupKind::strong: return "strong";
        case GroupKind::not_strong: return "not_strong";
    }
    return "?";
}

Classification classify(const GroupSpec& g) {
    if (g.trivial()) return {GroupKind::trivial, ExtNat(0), "trivial group"};
    if (g.omega_tower()) {
        const auto& t = *g.omega_tower();
        bool divisible = t.dims.default_dim() == ExtNat(0) &&
                         std::all_of(t.dims.exceptions().begin(), t.dims.exceptions().end(),
                                     [](const auto& kv) { return kv.second == ExtNat(0); });
        if (!divisible)
            return {GroupKind::not_strong, ExtNat::infinity(),
                    "omega tower is not divisible: unbounded regular rank"};
    }
    for (const auto& c : g.components())
        if (c.dims.default_dim().is_infinite())
            return {GroupKind::not_strong, ExtNat::infinity(),
                    "component " + c.name + " has infinite p-dimension at infinitely many primes"};
    ExtNat r(1);
    for (long long p : infinite_exception_primes(g)) r += ExtNat(infinite_jumps(g, p).size());
    if (r == ExtNat(1))
        return {GroupKind::dp_minimal, r, "all p-dimensions finite"};
    return {GroupKind::strong, r, "bounded regular rank, almost finite dimension"};
}

ExtNat dp_rank(const GroupSpec& g) { return classify(g).dp_rank; }

ExtNat vca_number(const GroupSpec& g) {
    Classification cl = classify(g);
    if (cl.kind == GroupKind::trivial) return ExtNat(0);
    if (cl.kind == GroupKind::not_strong) return ExtNat::infinity();
    // Independent route: per prime, promote every jump to the closest jump
    // (or G) reachable through finite-dimension quotients and count the
    // distinct promotion targets; each infinite boundary survives as one
    // directed family, plus one family of order atoms.
    ExtNat total(1);
    for (long long p : infinite_exception_primes(g)) {
        auto levels = jump_levels_for_prime(g, p);  // descending levels
        std::set<std::size_t> targets;
        for (std::size_t j = 0; j < levels.size(); ++j) {
            std::size_t target = 0;  // promote to G unless a boundary blocks
            for (std::size_t m = j;; ++m) {
                std::size_t upper = (m + 1 < levels.size()) ? levels[m + 1] : 0;
                if (dim_p_quotient(g, p, upper, levels[m]).is_infinite()) {
                    target = levels[m];
                    break;
                }
                if (m + 1 == levels.size()) break;
            }
            targets.insert(target);
        }
        // Promotions hitting G (target 0 stands for it) are absorbed into
        // the trivial family.
        total += ExtNat(targets.size() - (targets.count(0) ? 1 : 0));
    }
    return total;
}

}  // namespace oag
