#include "chase/gadgets.hh"

namespace chase {

namespace {

// Longest prefix of node inside rSet; -1 when even the root is outside.
int border_base(const Forest& f, int node, const std::set<int>& r_set) {
  int n = node;
  while (n != -1 && !r_set.count(n)) n = f.nodes[n].parent;
  return n;
}

std::set<Term> global_terms(const Forest& f, const std::set<int>& r_set) {
  std::set<Term> g;
  for (int n : r_set)
    for (const Term& t : f.adr(n).args) g.insert(t);
  return g;
}

} // namespace

int rank(const Forest& f, int node, const std::set<int>& r_set) {
  int base = border_base(f, node, r_set);
  if (base == -1) throw AddressNotInForest();
  return f.depth(node) - f.depth(base);
}

bool is_prettier(const Forest& f, int u, int w, const std::set<int>& r_set) {
  const Atom& au = f.adr(u);
  const Atom& aw = f.adr(w);
  if (au.pred != aw.pred) return false;
  auto g = global_terms(f, r_set);
  for (size_t i = 0; i < au.args.size(); ++i) {
    if (g.count(au.args[i]) && au.args[i] != aw.args[i]) return false;
    for (size_t j = i + 1; j < au.args.size(); ++j)
      if (au.args[i] == au.args[j] && aw.args[i] != aw.args[j]) return false;
  }
  return true;
}

Blockers default_blockers(Forest& f, const std::set<int>& r_set) {
  Blockers b;
  std::vector<int> cand(r_set.begin(), r_set.end());
  for (int n : r_set)
    for (size_t ri = 0; ri < f.rs->rules.size(); ++ri) {
      if (!is_trigger(f, (int)ri, n)) continue;
      // Border trigger: applied children are in rSet, border ones are not.
      auto c1 = f.child(n, (int)ri, 1);
      if (c1 && r_set.count(*c1)) continue; // applied, not border
      auto team = find_blocking_team(f, Trigger{(int)ri, n}, &cand);
      if (!team) throw NoBlockingTeam();
      b[{(int)ri, n}] = *team;
    }
  return b;
}

int step_better(Forest& f, int node, const std::set<int>& r_set,
                const Blockers& blockers) {
  int base = border_base(f, node, r_set);
  if (base == -1) throw AddressNotInForest();
  if (base == node) return node;
  // Path base -> node; the first step determines the border trigger.
  std::vector<int> path;
  for (int n = node; n != base; n = f.nodes[n].parent) path.push_back(n);
  int first = path.back(); // child of base on the way to node
  auto it = blockers.find({f.nodes[first].rule, base});
  if (it == blockers.end()) throw NoBlockingTeam();
  int out = it->second[f.nodes[first].iota - 1];
  for (int i = (int)path.size() - 2; i >= 0; --i)
    out = f.ensure_child(out, f.nodes[path[i]].rule, f.nodes[path[i]].iota);
  return out;
}

int better_address(Forest& f, int node, const std::set<int>& r_set,
                   const Blockers& blockers) {
  while (!r_set.count(node)) node = step_better(f, node, r_set, blockers);
  return node;
}

std::map<int, int> btr_map(Forest& f, const std::set<int>& r_set,
                           const Blockers& blockers) {
  std::map<int, int> m;
  size_t existing = f.nodes.size();
  for (size_t n = 0; n < existing; ++n)
    m[(int)n] = better_address(f, (int)n, r_set, blockers);
  return m;
}

} // namespace chase
