#pragma once

#include "chase/termination.hh"

namespace chase {

// Bounded brute-force exploration of restricted derivations. Fairness at
// finite scale is a bounded-starvation scheduler: once the oldest pending
// unblocked trigger has been passed over max_defer times, it is forced next.
struct OracleBounds {
  int max_len = 40;
  int max_branch = 64;
  int max_defer = 4;
  long max_states = 200000; // DFS work budget; exceeding it is a cutoff
};

struct ExplorationResult {
  enum Status { AllTerminate, InfinitePattern, Inconclusive } status;
  int bound = 0;              // max_len used
  int longest_run = 0;        // longest maximal derivation seen
  long maximal_runs = 0;      // distinct final forests of maximal branches
  long blocked_resolutions = 0;
  std::vector<std::string> lasso_trace; // triggers of one detected period
};

std::string to_string(ExplorationResult::Status s);

// DFS over orders of unblocked active triggers, deduplicated by resulting
// forest. A branch ends successfully when no active unblocked trigger
// remains (a finite fair restricted derivation). A pending-trigger shape
// signature repeating three times along a branch with strictly growing
// forest is reported as InfinitePattern; hitting max_len otherwise makes
// the result Inconclusive.
ExplorationResult explore(const Instance& inst, const RuleSet& rs,
                          const OracleBounds& b);

struct CrossEntry {
  Atom atom;
  std::string decide_verdict;
  std::string oracle_status;
  bool agree = true;
};

struct CrossReport {
  std::vector<CrossEntry> entries;
  bool all_agree = true;
};

// Per critical atom: witness search vs exploration. Disagreements are
// (witness found, oracle AllTerminate), (covered exhaustion, oracle
// InfinitePattern), and witnesses failing concrete replay.
CrossReport cross_validate(const RuleSet& rs, const Bounds& db,
                           const OracleBounds& ob);

} // namespace chase
