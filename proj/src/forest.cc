#include "chase/forest.hh"

#include <algorithm>
#include <deque>

namespace chase {

std::optional<std::map<std::string, Term>> body_match(const Rule& r,
                                                      const Atom& at) {
  if (r.body.pred != at.pred || r.body.vars.size() != at.args.size())
    return std::nullopt;
  std::map<std::string, Term> m;
  for (size_t j = 0; j < r.body.vars.size(); ++j) {
    auto [it, fresh] = m.emplace(r.body.vars[j], at.args[j]);
    if (!fresh && it->second != at.args[j]) return std::nullopt;
  }
  return m;
}

std::vector<Atom> rule_apply(const Rule& r, const Atom& at,
                             const std::string& at_key) {
  auto m = body_match(r, at);
  if (!m) throw NoMatch();
  std::vector<Atom> out;
  for (const auto& h : r.head) {
    Atom a;
    a.pred = h.pred;
    for (const auto& v : h.vars) {
      auto it = m->find(v);
      if (it != m->end())
        a.args.push_back(it->second);
      else
        a.args.push_back(make_null(v, at_key, r.id));
    }
    out.push_back(std::move(a));
  }
  return out;
}

Forest make_forest(const Instance& inst, const RuleSet& rs) {
  Forest f;
  f.rs = &rs;
  f.root_count = (int)inst.facts.size();
  for (int i = 0; i < f.root_count; ++i) {
    Forest::Node n;
    n.parent = -1;
    n.rule = -1;
    n.iota = 0;
    n.root = i;
    n.depth = 0;
    n.atom = inst.facts[i];
    n.key = to_string(inst.facts[i]);
    f.nodes.push_back(std::move(n));
  }
  return f;
}

std::optional<int> Forest::child(int node, int rule, int iota) const {
  auto it = child_of.find({node, rule, iota});
  if (it == child_of.end()) return std::nullopt;
  return it->second;
}

int Forest::ensure_child(int node, int rule, int iota) {
  if (auto c = child(node, rule, iota)) return *c;
  const Rule& r = rs->rules[rule];
  auto atoms = rule_apply(r, nodes[node].atom, nodes[node].key);
  // Materialize all siblings of the trigger at once; addresses come in
  // (rule,1)..(rule,k) batches.
  int wanted = -1;
  for (int i = 1; i <= (int)atoms.size(); ++i) {
    auto it = child_of.find({node, rule, i});
    int id;
    if (it != child_of.end()) {
      id = it->second;
    } else {
      Node n;
      n.parent = node;
      n.rule = rule;
      n.iota = i;
      n.root = nodes[node].root;
      n.depth = nodes[node].depth + 1;
      n.atom = atoms[i - 1];
      n.key = nodes[node].key + "/" + r.id + "." + std::to_string(i);
      id = (int)nodes.size();
      nodes.push_back(std::move(n));
      child_of[{node, rule, i}] = id;
    }
    if (i == iota) wanted = id;
  }
  if (wanted < 0) throw AddressNotInForest();
  return wanted;
}

void Forest::expand_all(int depth, long max_nodes) {
  std::deque<int> q;
  for (int i = 0; i < root_count; ++i) q.push_back(i);
  while (!q.empty()) {
    int n = q.front();
    q.pop_front();
    if (nodes[n].depth >= depth) continue;
    if (max_nodes >= 0 && (long)nodes.size() > max_nodes) break;
    for (size_t ri = 0; ri < rs->rules.size(); ++ri) {
      if (!body_match(rs->rules[ri], nodes[n].atom)) continue;
      for (int i = 1; i <= rs->rules[ri].head_size(); ++i)
        q.push_back(ensure_child(n, (int)ri, i));
    }
  }
}

bool Forest::is_prefix(int anc, int n) const {
  while (n != -1) {
    if (n == anc) return true;
    n = nodes[n].parent;
  }
  return false;
}

std::vector<std::pair<int, int>> Forest::word(int n) const {
  std::vector<std::pair<int, int>> w;
  while (nodes[n].parent != -1) {
    w.emplace_back(nodes[n].rule, nodes[n].iota);
    n = nodes[n].parent;
  }
  std::reverse(w.begin(), w.end());
  return w;
}

Forest expand(const Instance& inst, const RuleSet& rs, int depth) {
  Forest f = make_forest(inst, rs);
  f.expand_all(depth);
  return f;
}

bool is_trigger(const Forest& f, int rule, int node) {
  return body_match(f.rs->rules[rule], f.adr(node)).has_value();
}

std::vector<Atom> trigger_children_atoms(const Forest& f, Trigger t) {
  auto it = f.kids_cache.find({t.node, t.rule});
  if (it != f.kids_cache.end()) return it->second;
  auto kids = rule_apply(f.rs->rules[t.rule], f.adr(t.node), f.key(t.node));
  f.kids_cache.emplace(std::make_pair(t.node, t.rule), kids);
  return kids;
}

namespace {

// The full condition sweep over a candidate team, with the would-be child
// atoms already computed. (i) predicates match; (ii) frontier positions
// carry the exact child terms; (iii) equal child terms propagate to equal
// team terms. Both (ii) and (iii) are one sweep over position pairs: equal
// terms in the would-be children force equal terms in the team, and
// frontier terms are never fresh so (ii) is the singleton case checked
// directly.
bool team_ok(const Forest& f, const Rule& r, const std::vector<Atom>& kids,
             const std::vector<int>& team) {
  for (int i = 0; i < (int)kids.size(); ++i)
    if (f.adr(team[i]).pred != kids[i].pred) return false; // (i)
  for (int i = 0; i < (int)kids.size(); ++i)
    for (size_t j = 0; j < kids[i].args.size(); ++j) {
      if (r.frontier.count(r.head[i].vars[j]) &&
          f.adr(team[i]).args[j] != kids[i].args[j])
        return false;
      for (int i2 = 0; i2 < (int)kids.size(); ++i2)
        for (size_t j2 = 0; j2 < kids[i2].args.size(); ++j2)
          if (kids[i].args[j] == kids[i2].args[j2] &&
              f.adr(team[i]).args[j] != f.adr(team[i2]).args[j2])
            return false;
    }
  return true;
}

} // namespace

bool is_blocking_team(const Forest& f, const std::vector<int>& team,
                      Trigger t) {
  const Rule& r = f.rs->rules[t.rule];
  if ((int)team.size() != r.head_size()) return false;
  for (int v : team)
    if (v < 0 || v >= (int)f.nodes.size()) throw AddressNotInForest();
  return team_ok(f, r, trigger_children_atoms(f, t), team);
}

namespace {

// Shared enumeration core; `cand` order determines which team is found
// first.
std::optional<std::vector<int>> search_team(const Forest& f, Trigger t,
                                            const std::vector<int>& cand) {
  const Rule& r = f.rs->rules[t.rule];
  int k = r.head_size();
  auto kids = trigger_children_atoms(f, t);
  // Per-position prefilter: predicate, frontier positions, and the equality
  // pattern within child atom i alone. Keeps the candidate order, so the
  // first team found is unchanged.
  std::vector<std::vector<int>> fits(k);
  for (int i = 0; i < k; ++i)
    for (int c : cand) {
      const Atom& v = f.adr(c);
      if (v.pred != kids[i].pred) continue;
      bool ok = true;
      for (size_t j = 0; j < kids[i].args.size() && ok; ++j) {
        if (r.frontier.count(r.head[i].vars[j]) &&
            v.args[j] != kids[i].args[j])
          ok = false;
        for (size_t j2 = j + 1; j2 < kids[i].args.size() && ok; ++j2)
          if (kids[i].args[j] == kids[i].args[j2] &&
              v.args[j] != v.args[j2])
            ok = false;
      }
      if (ok) fits[i].push_back(c);
    }
  // Cross-atom equality constraints are all that remains after the
  // prefilter: equal terms at positions of two different child atoms force
  // equal team terms there.
  std::vector<std::tuple<int, int, int, int>> cross;
  for (int i = 0; i < k; ++i)
    for (size_t j = 0; j < kids[i].args.size(); ++j)
      for (int i2 = i + 1; i2 < k; ++i2)
        for (size_t j2 = 0; j2 < kids[i2].args.size(); ++j2)
          if (kids[i].args[j] == kids[i2].args[j2])
            cross.emplace_back(i, (int)j, i2, (int)j2);
  std::vector<int> team(k);
  auto rec = [&](auto&& self, int i) -> bool {
    if (i == k) {
      for (auto [a, j, a2, j2] : cross)
        if (f.adr(team[a]).args[j] != f.adr(team[a2]).args[j2]) return false;
      return true;
    }
    for (int c : fits[i]) {
      team[i] = c;
      if (self(self, i + 1)) return true;
    }
    return false;
  };
  if (rec(rec, 0)) return team;
  return std::nullopt;
}

} // namespace

std::optional<std::vector<int>> find_blocking_team(
    const Forest& f, Trigger t, const std::vector<int>* candidates) {
  if (t.node < 0 || t.node >= (int)f.nodes.size()) throw AddressNotInForest();
  std::vector<int> cand;
  if (candidates) {
    cand = *candidates;
  } else {
    cand.resize(f.nodes.size());
    for (size_t i = 0; i < f.nodes.size(); ++i) cand[i] = (int)i;
  }
  std::map<int, std::vector<std::pair<int, int>>> words;
  for (int c : cand) words.emplace(c, f.word(c));
  std::sort(cand.begin(), cand.end(), [&](int a, int b) {
    if (f.depth(a) != f.depth(b)) return f.depth(a) < f.depth(b);
    if (f.nodes[a].root != f.nodes[b].root)
      return f.nodes[a].root < f.nodes[b].root;
    return words[a] < words[b];
  });
  return search_team(f, t, cand);
}

bool has_blocking_team(const Forest& f, Trigger t,
                       const std::vector<int>* candidates) {
  if (t.node < 0 || t.node >= (int)f.nodes.size()) throw AddressNotInForest();
  if (candidates) return search_team(f, t, *candidates).has_value();
  std::vector<int> cand(f.nodes.size());
  for (size_t i = 0; i < f.nodes.size(); ++i) cand[i] = (int)i;
  return search_team(f, t, cand).has_value();
}

} // namespace chase
