#include "chase/derivation.hh"

#include <algorithm>

namespace chase {

namespace {

bool applied(Forest& f, Trigger t, const std::set<int>& present) {
  int k = f.rs->rules[t.rule].head_size();
  for (int i = 1; i <= k; ++i) {
    auto c = f.child(t.node, t.rule, i);
    if (!c || !present.count(*c)) return false;
  }
  return true;
}

bool blocked_in(Forest& f, Trigger t, const std::set<int>& present) {
  std::vector<int> cand(present.begin(), present.end());
  return has_blocking_team(f, t, &cand);
}

void apply_trigger(Forest& f, Trigger t, std::set<int>& present) {
  int k = f.rs->rules[t.rule].head_size();
  for (int i = 1; i <= k; ++i) present.insert(f.ensure_child(t.node, t.rule, i));
}

} // namespace

std::vector<std::set<int>> replay(Forest& f, const Derivation& d) {
  std::vector<std::set<int>> steps;
  std::set<int> present;
  for (int i = 0; i < f.root_count; ++i) present.insert(i);
  steps.push_back(present);
  for (size_t n = 0; n < d.triggers.size(); ++n) {
    Trigger t = d.triggers[n];
    if (!present.count(t.node))
      throw MalformedDerivation((int)n, "trigger address not present");
    if (!is_trigger(f, t.rule, t.node))
      throw MalformedDerivation((int)n, "rule body does not match the atom");
    if (applied(f, t, present))
      throw MalformedDerivation((int)n, "trigger not active (already applied)");
    apply_trigger(f, t, present);
    steps.push_back(present);
  }
  return steps;
}

std::vector<Trigger> active_unblocked(Forest& f, const std::set<int>& present) {
  std::vector<Trigger> out;
  for (int n : present)
    for (size_t ri = 0; ri < f.rs->rules.size(); ++ri) {
      Trigger t{(int)ri, n};
      if (!is_trigger(f, (int)ri, n)) continue;
      if (applied(f, t, present)) continue;
      if (blocked_in(f, t, present)) continue;
      out.push_back(t);
    }
  std::sort(out.begin(), out.end(), [](Trigger a, Trigger b) {
    return std::tie(a.node, a.rule) < std::tie(b.node, b.rule);
  });
  return out;
}

ValidationReport validate_derivation(Forest& f, const Derivation& d,
                                     DerivationKind kind, int horizon) {
  ValidationReport rep;
  std::vector<std::set<int>> steps;
  try {
    steps = replay(f, d);
  } catch (const MalformedDerivation& e) {
    throw;
  }
  const std::set<int>& fin = steps.back();

  if (kind == DerivationKind::Restricted) {
    for (size_t n = 0; n < d.triggers.size(); ++n)
      if (blocked_in(f, d.triggers[n], steps[n])) {
        rep.ok = false;
        rep.violation_step = (int)n;
        rep.message = "applied trigger was blocked at its step";
        return rep;
      }
    return rep;
  }

  if (kind == DerivationKind::Oblivious) {
    f.expand_all(horizon);
    for (size_t n = 0; n < f.nodes.size(); ++n)
      if (f.depth((int)n) <= horizon && !fin.count((int)n)) {
        rep.ok = false;
        rep.message = "missing address " + f.key((int)n);
        return rep;
      }
    return rep;
  }

  // Fair: every trigger in the final forest is applied or blocked there.
  for (int n : fin)
    for (size_t ri = 0; ri < f.rs->rules.size(); ++ri) {
      Trigger t{(int)ri, n};
      if (!is_trigger(f, (int)ri, n)) continue;
      if (applied(f, t, fin)) continue;
      if (blocked_in(f, t, fin)) continue;
      rep.starving.push_back(t);
    }
  if (!rep.starving.empty()) {
    rep.ok = false;
    rep.message = "active unblocked triggers remain in the final forest";
  }
  return rep;
}

bool check_mixed(Forest& f, const Derivation& m, const Derivation& r) {
  // Subsequence embedding: triggers are unique within a derivation, so the
  // embedding is fixed by (rule, node) identity.
  std::vector<int> pos;
  for (const Trigger& t : r.triggers) {
    auto it = std::find(m.triggers.begin(), m.triggers.end(), t);
    if (it == m.triggers.end()) return false;
    pos.push_back((int)(it - m.triggers.begin()));
  }
  if (!std::is_sorted(pos.begin(), pos.end()) ||
      std::adjacent_find(pos.begin(), pos.end()) != pos.end())
    return false;
  std::set<int> shared(pos.begin(), pos.end());
  auto steps = replay(f, m);
  for (size_t n = 0; n < m.triggers.size(); ++n)
    if (shared.count((int)n) && blocked_in(f, m.triggers[n], steps[n]))
      return false;
  return true;
}

Derivation restrict_derivation(Forest& f, const Derivation& m) {
  Derivation out;
  std::set<int> present;
  for (int i = 0; i < f.root_count; ++i) present.insert(i);
  for (const Trigger& t : m.triggers) {
    if (!present.count(t.node)) continue;
    if (!is_trigger(f, t.rule, t.node)) continue;
    if (applied(f, t, present)) continue;
    if (blocked_in(f, t, present)) continue;
    out.triggers.push_back(t);
    apply_trigger(f, t, present);
  }
  return out;
}

} // namespace chase
