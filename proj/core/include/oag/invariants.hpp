#pragma once

#include <string>
#include <vector>

#include "oag/group.hpp"

namespace oag {

// dim_p(G) = dim over F_p of G/pG.
ExtNat dim_p(const GroupSpec& g, long long p);
// dim_p of the quotient CS(top)/CS(bottom), i.e. components top+1..bottom.
ExtNat dim_p_quotient(const GroupSpec& g, long long p, std::size_t top_level,
                      std::size_t bottom_level);

// The n-regular jumps RJ_n(G) = { A_n(x) : x != 0 }, returned as an
// inclusion-ascending chain of convex subgroups (levels descending).
// Composite n is the union over its primes. Throws for specs of unbounded
// regular rank (omega tower that is not n-divisible).
std::vector<ConvexSubgroup> regular_jumps(const GroupSpec& g, long long n);

// Jumps Δ in RJ_p whose successor quotient Δ⁺/Δ (Δ⁺ the next jump, or G)
// has infinite p-dimension.
std::vector<ConvexSubgroup> infinite_jumps(const GroupSpec& g, long long p);

enum class GroupKind { trivial, dp_minimal, strong, not_strong };

std::string kind_name(GroupKind k);

struct Classification {
    GroupKind kind;
    ExtNat dp_rank;
    std::string reason;
};

// dp-rank: 0 for the trivial group, 1 + sum over primes of the number of
// infinite jumps for strong groups, infinity otherwise.
ExtNat dp_rank(const GroupSpec& g);
Classification classify(const GroupSpec& g);

// Number of definable directed families needed to cover the definable
// subsets in one variable (the "VC-algebraicity" count); equals dp_rank for
// nontrivial strong groups and is computed by an independent per-prime
// promotion walk so the two can be cross-checked.
ExtNat vca_number(const GroupSpec& g);

}  // namespace oag
