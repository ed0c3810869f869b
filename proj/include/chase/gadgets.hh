#pragma once

#include "chase/forest.hh"

#include <set>

namespace chase {

// Utilities over a restricted prefix rSet (prefix-closed node set containing
// the roots) of a forest: address ranks, the prettier preorder, and the
// better-address map obtained by iterating team substitution at the border.

// 0 on rSet, otherwise the distance to the longest prefix inside rSet.
int rank(const Forest& f, int node, const std::set<int>& r_set);

// w is prettier than u: same predicate; positions holding global terms
// (terms occurring in adr(rSet)) agree exactly; equalities of adr(u) are
// preserved in adr(w).
bool is_prettier(const Forest& f, int u, int w, const std::set<int>& r_set);

struct NoBlockingTeam : std::runtime_error {
  NoBlockingTeam() : std::runtime_error(
      "border trigger has no blocking team in the restricted prefix") {}
};

// Border trigger (rule, node) -> a blocking team inside rSet. The choice of
// team is an input; any team works.
using Blockers = std::map<std::pair<int, int>, std::vector<int>>;

// Deterministic default: first team found inside rSet for every border
// trigger. Throws NoBlockingTeam when rSet is not the prefix of a fair
// restricted derivation.
Blockers default_blockers(Forest& f, const std::set<int>& r_set);

// One team-substitution step on a virtual node: replace the border child on
// its address by the corresponding blocker and re-apply the remaining
// suffix. Rank strictly decreases.
int step_better(Forest& f, int node, const std::set<int>& r_set,
                const Blockers& blockers);

// Iterated step_better down to rank 0; identity on rSet.
int better_address(Forest& f, int node, const std::set<int>& r_set,
                   const Blockers& blockers);

// better_address for every currently materialized node.
std::map<int, int> btr_map(Forest& f, const std::set<int>& r_set,
                           const Blockers& blockers);

} // namespace chase
