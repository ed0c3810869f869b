#pragma once

#include "chase/forest.hh"

namespace chase {

// Abstract terms: constants verbatim, nulls compressed to small integer
// indices. Indices stay within 1..3*max_arity.
struct ATerm {
  bool is_const;
  std::string name; // constants
  int idx = 0;      // indices

  auto operator<=>(const ATerm&) const = default;
};

struct AAtom {
  std::string pred;
  std::vector<ATerm> args;

  auto operator<=>(const AAtom&) const = default;
};

ATerm aconst(std::string name);
ATerm aindex(int i);
std::string to_string(const ATerm& t);
std::string to_string(const AAtom& a);

// Labels for every node of a finite forest. Addresses outside the forest
// are the bottom symbol, represented here simply by absence of a node.
struct AbstractLabeling {
  const Forest* f = nullptr;
  std::vector<AAtom> label; // by node id
};

struct UnlabeledAddress : std::runtime_error {
  UnlabeledAddress() : std::runtime_error("address carries no label") {}
};

// Abstract rule application: unique body match over abstract terms, frontier
// inherited, each fresh existential takes the smallest index absent from the
// parent label, assigned in head-position order.
std::optional<std::vector<AAtom>> abstract_apply(const Rule& r,
                                                 const AAtom& at);

// Correct labeling of a finite forest: roots label themselves, every trigger
// triple is isomorphic to its concrete counterpart.
AbstractLabeling abstractize(const Forest& f);

// True iff adr(u)_i = adr(w)_j in the concrete forest, decoded from labels
// alone: constants compare by name; an index denotes the same null at two
// addresses iff both occurrences trace back, through labels that all carry
// the index, to sibling children of one trigger with equal indices.
// Positions are 0-based.
bool terms_equal(const AbstractLabeling& l, int u, int i, int w, int j);

// Blocking test phrased purely in terms of terms_equal and predicate
// equality; must agree with is_blocking_team on the concrete forest.
bool blocks_abstract(const AbstractLabeling& l, const std::vector<int>& team,
                     Trigger t);

// Finite quotient of the chase tree: canonical abstract atoms with one
// deterministic successor per (node, rule, iota).
struct AbstractGraph {
  std::vector<AAtom> nodes; // node 0 is the root
  std::map<std::tuple<int, int, int>, int> edges; // (node, rule, iota) -> node
};

// Indices renamed to first-occurrence order; constants kept verbatim.
AAtom canon_atom(const AAtom& a);

AAtom to_abstract(const Atom& ground); // constants-only atom

AbstractGraph build_graph(const RuleSet& rs, const Atom& omega);

} // namespace chase
