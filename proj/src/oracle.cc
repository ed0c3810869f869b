#include "chase/oracle.hh"

#include <algorithm>
#include <sstream>

namespace chase {

std::string to_string(ExplorationResult::Status s) {
  switch (s) {
    case ExplorationResult::AllTerminate: return "AllTerminate";
    case ExplorationResult::InfinitePattern: return "InfinitePattern";
    default: return "Inconclusive";
  }
}

namespace {

// Shape of the pending unblocked triggers: constants verbatim, nulls
// renamed jointly by first occurrence after a deterministic sort. Invariant
// under null renaming of the concrete forest.
std::string pending_signature(const Forest& f,
                              const std::vector<Trigger>& pending) {
  std::vector<std::pair<std::string, Trigger>> items;
  for (Trigger t : pending) {
    const Atom& a = f.adr(t.node);
    std::map<Term, int> local;
    std::string s = f.rs->rules[t.rule].id + ":" + a.pred + "(";
    for (const Term& x : a.args) {
      if (x.is_const()) {
        s += x.name;
      } else {
        auto [it, fresh] = local.emplace(x, (int)local.size() + 1);
        s += "*" + std::to_string(it->second);
      }
      s += ",";
    }
    s += ")";
    items.push_back({std::move(s), t});
  }
  std::sort(items.begin(), items.end());
  std::map<Term, int> joint;
  std::string sig;
  for (const auto& [local_shape, t] : items) {
    const Atom& a = f.adr(t.node);
    sig += f.rs->rules[t.rule].id + ":" + a.pred + "(";
    for (const Term& x : a.args) {
      if (x.is_const()) {
        sig += x.name;
      } else {
        auto [it, fresh] = joint.emplace(x, (int)joint.size() + 1);
        sig += "*" + std::to_string(it->second);
      }
      sig += ",";
    }
    sig += ");";
  }
  return sig;
}

std::string state_key(const std::set<int>& present) {
  std::string k;
  for (int n : present) k += std::to_string(n) + ",";
  return k;
}

struct Explorer {
  Explorer(Forest& f_, const OracleBounds& b_) : f(f_), b(b_) {}
  Forest& f;
  const OracleBounds& b;
  ExplorationResult res;
  bool saw_cutoff = false;
  bool saw_truncation = false;
  std::set<std::string> clean_states; // fully explored, all branches maximal
  std::set<std::string> dirty_states; // fully explored, some branch cut off
  std::set<std::string> maximal_forests;
  long states = 0;

  struct BranchStep {
    std::string sig;
    size_t forest_size;
    Trigger applied;
  };
  std::vector<BranchStep> history;

  bool infinite = false;

  void record_infinite(const std::string& sig) {
    // Trace: the triggers between the first and second occurrence.
    std::vector<size_t> occ;
    for (size_t i = 0; i < history.size(); ++i)
      if (history[i].sig == sig) occ.push_back(i);
    res.lasso_trace.clear();
    if (occ.size() >= 2)
      for (size_t i = occ[0] + 1; i <= occ[1]; ++i)
        res.lasso_trace.push_back(
            f.rs->rules[history[i].applied.rule].id + " @ " +
            f.key(history[i].applied.node));
    infinite = true;
  }

  // Returns true when every branch below ended maximal (no cutoff).
  // `applied` is the trigger that produced this state, absent at the root.
  bool dfs(std::set<int>& present, std::map<Trigger, int>& defers, int len,
           Trigger applied) {
    if (infinite) return false;
    std::string key = state_key(present);
    // Memo before any per-state work. A state whose subtree was cut off
    // stays inconclusive on revisits; both memos only ever turn provable
    // AllTerminate into Inconclusive, never the other way.
    if (clean_states.count(key)) return true;
    if (dirty_states.count(key)) return false;
    if (++states > b.max_states) {
      saw_cutoff = true;
      return false;
    }

    auto pending = active_unblocked(f, present);
    res.blocked_resolutions++; // resolution happens implicitly per state
    if (pending.empty()) {
      res.longest_run = std::max(res.longest_run, len);
      maximal_forests.insert(key);
      clean_states.insert(key);
      return true;
    }
    if (len >= b.max_len) {
      saw_cutoff = true;
      return false;
    }

    std::string sig = pending_signature(f, pending);
    int seen = 0;
    bool growing = true;
    size_t last_size = 0;
    for (const auto& h : history)
      if (h.sig == sig) {
        ++seen;
        if (h.forest_size <= last_size) growing = false;
        last_size = std::max(last_size, h.forest_size);
      }
    history.push_back({sig, present.size(), applied});
    if (seen >= 2 && growing && present.size() > last_size) {
      record_infinite(sig);
      history.pop_back();
      return false;
    }

    Trigger oldest = pending[0];
    std::vector<Trigger> choices;
    if (defers[oldest] >= b.max_defer) {
      choices = {oldest};
    } else {
      choices = pending;
      if ((int)choices.size() > b.max_branch) {
        choices.resize(b.max_branch);
        saw_truncation = true;
      }
    }
    bool clean = true;
    for (Trigger c : choices) {
      if (states > b.max_states) {
        saw_cutoff = true;
        clean = false;
        break;
      }
      std::set<int> next = present;
      for (int i = 1; i <= f.rs->rules[c.rule].head_size(); ++i)
        next.insert(f.ensure_child(c.node, c.rule, i));
      std::map<Trigger, int> ndef = defers;
      if (!(c == oldest)) ndef[oldest]++;
      ndef.erase(c);
      bool sub = dfs(next, ndef, len + 1, c);
      if (infinite) {
        history.pop_back();
        return false;
      }
      clean = clean && sub;
    }
    history.pop_back();
    if (clean)
      clean_states.insert(key);
    else
      dirty_states.insert(key);
    return clean;
  }
};

} // namespace

ExplorationResult explore(const Instance& inst, const RuleSet& rs,
                          const OracleBounds& b) {
  Forest f = make_forest(inst, rs);
  Explorer ex{f, b};
  ex.res.bound = b.max_len;
  std::set<int> present;
  for (int i = 0; i < f.root_count; ++i) present.insert(i);
  std::map<Trigger, int> defers;
  bool clean = ex.dfs(present, defers, 0, Trigger{-1, -1});
  ex.res.maximal_runs = (long)ex.maximal_forests.size();
  if (ex.infinite)
    ex.res.status = ExplorationResult::InfinitePattern;
  else if (clean && !ex.saw_cutoff && !ex.saw_truncation)
    ex.res.status = ExplorationResult::AllTerminate;
  else
    ex.res.status = ExplorationResult::Inconclusive;
  return ex.res;
}

CrossReport cross_validate(const RuleSet& rs, const Bounds& db,
                           const OracleBounds& ob) {
  CrossReport rep;
  for (const Atom& a : enumerate_critical_atoms(rs)) {
    CrossEntry e;
    e.atom = a;
    SearchOutcome so = find_witness(rs, a, db);
    bool witness_ok = false;
    if (so.witness) {
      int d = 2 * ((int)so.witness->stem.size() +
                   2 * (int)so.witness->cycle.size());
      witness_ok = check_witness(rs, *so.witness, d);
      e.decide_verdict = witness_ok ? "NonTerminating" : "NonTerminating(unchecked)";
    } else if (so.exhausted_cleanly && db.max_stem >= so.graph_nodes &&
               db.max_cycle >= so.graph_nodes) {
      e.decide_verdict = "Terminating";
    } else {
      e.decide_verdict = "Unknown";
    }
    Instance inst;
    inst.facts.push_back(a);
    ExplorationResult er = explore(inst, rs, ob);
    e.oracle_status = to_string(er.status);
    e.agree = true;
    if (so.witness && !witness_ok) e.agree = false;
    if (so.witness && er.status == ExplorationResult::AllTerminate)
      e.agree = false;
    if (e.decide_verdict == "Terminating" &&
        er.status == ExplorationResult::InfinitePattern)
      e.agree = false;
    rep.all_agree = rep.all_agree && e.agree;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

} // namespace chase
