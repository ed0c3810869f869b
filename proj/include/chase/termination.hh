#pragma once

#include "chase/abstract.hh"
#include "chase/derivation.hh"

namespace chase {

struct Edge {
  int rule; // rule index
  int iota; // 1-based
  auto operator<=>(const Edge&) const = default;
};

struct Bounds {
  int max_stem = 10;
  int max_cycle = 6;
  int check_depth = 24;
};

struct CertNode {
  std::string address;
  bool condition_i = true;
  std::vector<std::string> fragile_increment; // empty for accepted witnesses
};

struct LassoWitness {
  Atom omega;
  std::vector<Edge> stem;
  std::vector<Edge> cycle;
  std::vector<CertNode> cert;
};

struct MalformedWitness : std::runtime_error {
  explicit MalformedWitness(const std::string& m) : std::runtime_error(m) {}
};
struct HorizonTooSmall : std::runtime_error {
  HorizonTooSmall() : std::runtime_error("horizon smaller than the address") {}
};

struct Verdict {
  enum Kind { Terminating, NonTerminating, Unknown } kind;
  std::optional<LassoWitness> witness;
  Bounds used;
  int atom_index = -1; // critical atom the witness lives on
};

// A materialized prefix of the single infinite path P0 plus its twin
// addresses, over a forest rooted at a single atom.
struct PathContext {
  Forest* f = nullptr;
  std::vector<Edge> stem, cycle;
  std::vector<int> path;      // P0 node ids; path[0] is the root
  std::vector<int> path_rule; // rule fired at path[i] (the trigger pi_u)
  std::set<int> pset;         // P0 plus twin children of every path trigger
};

// Materializes `len` path edges (stem then repeated cycle). Throws
// MalformedWitness when an edge's rule does not fire on the path atom.
PathContext make_path_context(Forest& f, const std::vector<Edge>& stem,
                              const std::vector<Edge>& cycle, int len);

// bfr(u): twin-set addresses no longer than u. any(u): materialized
// addresses outside the twin set that do not extend u, capped at `horizon`
// symbols. u is an index into ctx.path.
std::pair<std::set<int>, std::set<int>> bfr_any(const PathContext& ctx,
                                                int u_idx, int horizon);

// No team inside bfr(u) blocks the path trigger at u.
bool condition_i(const PathContext& ctx, const AbstractLabeling& l, int u_idx);

// Path nodes w at or below u whose trigger is blocked by the fixed team
// (harm2) or by the team (v, s) for some s created between u and w (harm1).
// Written for head size 2 in the source formulas; v and s are single
// addresses, teams of other sizes use fragile() directly.
std::set<int> harm2(const PathContext& ctx, int u_idx, int v, int s,
                    int horizon);
std::set<int> harm1(const PathContext& ctx, int u_idx, int v, int horizon);

// Path nodes w with u in bfr(w) such that some team drawn from
// any(u) | bfr(w) blocks the trigger at w. Deduplicated through
// equivalence-class representatives.
std::set<int> fragile(const PathContext& ctx, int u_idx, int horizon);

// Class key of adr(v) relative to u: predicate, equality pattern, and the
// placement of every term of adr(u). Atoms with equal keys are isomorphic
// by a bijection fixing the terms of adr(u).
std::string equiv_key(const Forest& f, int u, int v);

// Partition of any(u) | bfr(u) into ~ classes.
std::vector<std::vector<int>> equiv_classes(const PathContext& ctx, int u_idx,
                                            int horizon);

// Lasso search over the abstract graph; candidates are verified on the
// concrete forest: condition (i) along stem plus two cycle unrollings and an
// empty per-period fragile increment on the second unrolling.
struct SearchOutcome {
  std::optional<LassoWitness> witness;
  bool exhausted_cleanly = true; // no enumeration or team-search budget hit
  int graph_nodes = 0;
};
SearchOutcome find_witness(const RuleSet& rs, const Atom& omega,
                           const Bounds& b);

// Independent replay: unroll the lasso to `depth` and re-verify both
// conditions with concrete (non-abstract) blocking checks.
bool check_witness(const RuleSet& rs, const LassoWitness& w, int depth);

// All-instances decision via critical atoms. Terminating only when every
// per-atom search exhausted a witness space covering its whole abstract
// graph; any verified witness gives NonTerminating; otherwise Unknown.
Verdict decide(const RuleSet& rs, const Bounds& b);

} // namespace chase
