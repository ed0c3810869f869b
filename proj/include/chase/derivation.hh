#pragma once

#include "chase/forest.hh"

#include <set>

namespace chase {

// A chase derivation: instance roots plus a trigger sequence. Step n+1 adds
// all children of trigger n to step n. Triggers are pairs (rule, node) over
// a shared lazily grown forest.
struct Derivation {
  std::vector<Trigger> triggers;
};

enum class DerivationKind { Oblivious, Restricted, Fair };

struct MalformedDerivation : std::runtime_error {
  int step;
  MalformedDerivation(int step, const std::string& msg)
      : std::runtime_error("step " + std::to_string(step) + ": " + msg),
        step(step) {}
};

struct ValidationReport {
  bool ok = true;
  int violation_step = -1;        // first violating step, -1 if none
  std::string message;
  std::vector<Trigger> starving;  // fair checks on truncated input: active
                                  // unblocked triggers left in the final forest
};

// Replays the derivation and returns the set of present nodes after every
// step; steps[0] is the instance. Throws MalformedDerivation when a trigger
// is not active at its step.
std::vector<std::set<int>> replay(Forest& f, const Derivation& d);

// restricted: no applied trigger is blocked at its step.
// oblivious: the final address set equals the full forest at `horizon`.
// fair: every trigger appearing in the final forest is applied or blocked
// there; leftovers are listed as starving and make the report fail, which
// on a truncated prefix is expected and purely diagnostic.
ValidationReport validate_derivation(Forest& f, const Derivation& d,
                                     DerivationKind kind, int horizon);

// Mixed-derivation check: r is a subsequence of m and every m-trigger that
// occurs in r is unblocked in m's forest at its position.
bool check_mixed(Forest& f, const Derivation& m, const Derivation& r);

// Greedy restriction: keep a trigger iff its address is present and it is
// unblocked in the set built so far. Output is restricted by construction.
Derivation restrict_derivation(Forest& f, const Derivation& m);

// Active unblocked triggers of a node set, in (node, rule) order.
std::vector<Trigger> active_unblocked(Forest& f, const std::set<int>& present);

} // namespace chase
