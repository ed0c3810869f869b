#pragma once

#include "chase/rules.hh"

#include <optional>
#include <tuple>

namespace chase {

// Applies a rule to a single atom sitting at the given address. The i-th
// result is head atom i with frontier variables substituted by the unique
// body match and each existential z replaced by the null (z, at_key, rule).
// Throws NoMatch when the body does not map onto the atom.
struct NoMatch : std::runtime_error {
  NoMatch() : std::runtime_error("rule body does not match the atom") {}
};
std::vector<Atom> rule_apply(const Rule& r, const Atom& at,
                             const std::string& at_key);

// Unique homomorphism from the body to the atom, or nothing.
std::optional<std::map<std::string, Term>> body_match(const Rule& r,
                                                      const Atom& at);

// The oblivious-chase representation forest. Nodes are addresses
// root-fact . (rule,iota)* and each node is labeled by its adr atom.
// The labeling is a function of the address alone, so lazily growing the
// forest never changes existing labels.
struct Forest {
  struct Node {
    int parent;  // -1 for roots
    int rule;    // rule index into rs->rules; -1 for roots
    int iota;    // 1-based; 0 for roots
    int root;    // index of the instance fact this address starts with
    int depth;   // number of address symbols
    Atom atom;   // adr of this address
    std::string key; // printable address, also used as null birth key
  };

  const RuleSet* rs = nullptr;
  std::vector<Node> nodes; // roots first, in instance order
  std::map<std::tuple<int, int, int>, int> child_of; // (node,rule,iota) -> node
  // Would-be children per trigger; a pure function of the address, cached.
  mutable std::map<std::pair<int, int>, std::vector<Atom>> kids_cache;

  int root_count = 0;

  const Atom& adr(int n) const { return nodes[n].atom; }
  int depth(int n) const { return nodes[n].depth; }
  const std::string& key(int n) const { return nodes[n].key; }

  // Looks a child up without creating it.
  std::optional<int> child(int node, int rule, int iota) const;
  // Creates the child if the rule body matches adr(node); throws NoMatch otherwise.
  int ensure_child(int node, int rule, int iota);
  // All addresses of length <= depth admitted by the inductive definition.
  // With max_nodes >= 0 the breadth-first expansion stops once the node
  // count exceeds the cap (existing nodes are never removed).
  void expand_all(int depth, long max_nodes = -1);

  bool is_prefix(int anc, int n) const; // anc is an address prefix of n

  // Address word as (rule, iota) pairs, for deterministic orderings.
  std::vector<std::pair<int, int>> word(int n) const;
};

Forest make_forest(const Instance& inst, const RuleSet& rs);

// expand(instance, rs, depth) of the spec surface.
Forest expand(const Instance& inst, const RuleSet& rs, int depth);

struct Trigger {
  int rule; // rule index
  int node; // address the rule fires at
  auto operator<=>(const Trigger&) const = default;
};

struct AddressNotInForest : std::runtime_error {
  AddressNotInForest() : std::runtime_error("address not in forest") {}
};

// Whether (rule, node) is a trigger: the body maps onto adr(node).
bool is_trigger(const Forest& f, int rule, int node);

// Atoms the trigger would produce (without materializing children).
std::vector<Atom> trigger_children_atoms(const Forest& f, Trigger t);

// Blocking-team test: predicate equality per head atom, frontier positions
// pinned to the trigger's own child terms, and equal child terms forcing
// equal team terms. |team| must equal the head size.
bool is_blocking_team(const Forest& f, const std::vector<int>& team, Trigger t);

// Exhaustive deterministic search for a blocking team among `candidates`
// (all forest nodes if empty is passed as nullptr). Candidates are scanned
// by address length, then lexicographic word order.
std::optional<std::vector<int>> find_blocking_team(
    const Forest& f, Trigger t, const std::vector<int>* candidates = nullptr);

// Existence only: skips the canonical candidate ordering.
bool has_blocking_team(const Forest& f, Trigger t,
                       const std::vector<int>* candidates = nullptr);

} // namespace chase
