#include "chase/abstract.hh"

#include <algorithm>
#include <cassert>
#include <deque>

namespace chase {

ATerm aconst(std::string name) { return ATerm{true, std::move(name), 0}; }
ATerm aindex(int i) { return ATerm{false, "", i}; }

std::string to_string(const ATerm& t) {
  return t.is_const ? t.name : "#" + std::to_string(t.idx);
}

std::string to_string(const AAtom& a) {
  std::string s = a.pred + "(";
  for (size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ",";
    s += to_string(a.args[i]);
  }
  return s + ")";
}

std::optional<std::vector<AAtom>> abstract_apply(const Rule& r,
                                                 const AAtom& at) {
  if (r.body.pred != at.pred || r.body.vars.size() != at.args.size())
    return std::nullopt;
  std::map<std::string, ATerm> m;
  for (size_t j = 0; j < r.body.vars.size(); ++j) {
    auto [it, fresh] = m.emplace(r.body.vars[j], at.args[j]);
    if (!fresh && it->second != at.args[j]) return std::nullopt;
  }
  // Fresh existentials: smallest indices absent from the parent label, in
  // order of first occurrence over head positions.
  std::set<int> used;
  for (const ATerm& t : at.args)
    if (!t.is_const) used.insert(t.idx);
  int next = 1;
  auto take_fresh = [&]() {
    while (used.count(next)) ++next;
    used.insert(next);
    return aindex(next);
  };
  for (const auto& h : r.head)
    for (const auto& v : h.vars)
      if (!m.count(v)) m.emplace(v, take_fresh());
  std::vector<AAtom> out;
  for (const auto& h : r.head) {
    AAtom a;
    a.pred = h.pred;
    for (const auto& v : h.vars) a.args.push_back(m.at(v));
    out.push_back(std::move(a));
  }
  return out;
}

AAtom to_abstract(const Atom& ground) {
  AAtom a;
  a.pred = ground.pred;
  for (const Term& t : ground.args) {
    assert(t.is_const());
    a.args.push_back(aconst(t.name));
  }
  return a;
}

AbstractLabeling abstractize(const Forest& f) {
  AbstractLabeling l;
  l.f = &f;
  l.label.resize(f.nodes.size());
  // Node ids are created parents-first, so one pass suffices.
  for (size_t n = 0; n < f.nodes.size(); ++n) {
    const auto& node = f.nodes[n];
    if (node.parent == -1) {
      l.label[n] = to_abstract(node.atom);
      continue;
    }
    auto kids = abstract_apply(f.rs->rules[node.rule], l.label[node.parent]);
    assert(kids && node.iota >= 1 && node.iota <= (int)kids->size());
    l.label[n] = (*kids)[node.iota - 1];
    for ([[maybe_unused]] const ATerm& t : l.label[n].args)
      assert(t.is_const || t.idx <= 3 * f.rs->max_arity);
  }
  return l;
}

namespace {

bool label_has(const AAtom& a, const ATerm& t) {
  return std::find(a.args.begin(), a.args.end(), t) != a.args.end();
}

// Walks up while the index occurs in the parent's label: the occurrence is
// inherited exactly as long as that holds, since fresh indices are always
// chosen absent from the parent.
int anchor(const AbstractLabeling& l, int n, const ATerm& t) {
  const Forest& f = *l.f;
  while (f.nodes[n].parent != -1 && label_has(l.label[f.nodes[n].parent], t))
    n = f.nodes[n].parent;
  return n;
}

} // namespace

bool terms_equal(const AbstractLabeling& l, int u, int i, int w, int j) {
  if (u < 0 || u >= (int)l.label.size() || w < 0 || w >= (int)l.label.size())
    throw UnlabeledAddress();
  const ATerm& a = l.label[u].args.at(i);
  const ATerm& b = l.label[w].args.at(j);
  if (a.is_const || b.is_const) return a == b;
  // Inherited occurrences keep their index, so occurrences of distinct
  // indices always denote distinct nulls.
  if (a.idx != b.idx) return false;
  int au = anchor(l, u, a), aw = anchor(l, w, b);
  if (au == aw) return true;
  const Forest& f = *l.f;
  // Same null iff born at the same trigger: sibling anchors of one rule.
  return f.nodes[au].parent != -1 &&
         f.nodes[au].parent == f.nodes[aw].parent &&
         f.nodes[au].rule == f.nodes[aw].rule;
}

bool blocks_abstract(const AbstractLabeling& l, const std::vector<int>& team,
                     Trigger t) {
  const Forest& f = *l.f;
  const Rule& r = f.rs->rules[t.rule];
  if ((int)team.size() != r.head_size()) return false;
  for (int v : team)
    if (v < 0 || v >= (int)l.label.size()) throw UnlabeledAddress();
  // Body positions of each frontier variable.
  std::map<std::string, int> body_pos;
  for (size_t p = 0; p < r.body.vars.size(); ++p)
    body_pos.emplace(r.body.vars[p], (int)p);
  for (int i = 0; i < r.head_size(); ++i) {
    if (l.label[team[i]].pred != r.head[i].pred) return false;
    if (l.label[team[i]].args.size() != r.head[i].vars.size()) return false;
  }
  for (int i = 0; i < r.head_size(); ++i)
    for (size_t jx = 0; jx < r.head[i].vars.size(); ++jx) {
      const std::string& v = r.head[i].vars[jx];
      if (r.frontier.count(v)) {
        // Frontier positions carry exactly the matched term of the parent.
        if (!terms_equal(l, team[i], (int)jx, t.node, body_pos.at(v)))
          return false;
      } else {
        // One shared image per existential variable.
        for (int i2 = 0; i2 < r.head_size(); ++i2)
          for (size_t j2 = 0; j2 < r.head[i2].vars.size(); ++j2)
            if (r.head[i2].vars[j2] == v &&
                !terms_equal(l, team[i], (int)jx, team[i2], (int)j2))
              return false;
      }
    }
  return true;
}

AAtom canon_atom(const AAtom& a) {
  AAtom out;
  out.pred = a.pred;
  std::map<int, int> ren;
  for (const ATerm& t : a.args) {
    if (t.is_const) {
      out.args.push_back(t);
    } else {
      auto [it, fresh] = ren.emplace(t.idx, (int)ren.size() + 1);
      out.args.push_back(aindex(it->second));
    }
  }
  return out;
}

AbstractGraph build_graph(const RuleSet& rs, const Atom& omega) {
  AbstractGraph g;
  std::map<AAtom, int> index;
  AAtom root = canon_atom(to_abstract(omega));
  g.nodes.push_back(root);
  index[root] = 0;
  std::deque<int> q{0};
  while (!q.empty()) {
    int n = q.front();
    q.pop_front();
    for (size_t ri = 0; ri < rs.rules.size(); ++ri) {
      auto kids = abstract_apply(rs.rules[ri], g.nodes[n]);
      if (!kids) continue;
      for (int i = 1; i <= (int)kids->size(); ++i) {
        AAtom c = canon_atom((*kids)[i - 1]);
        auto [it, fresh] = index.emplace(c, (int)g.nodes.size());
        if (fresh) {
          g.nodes.push_back(c);
          q.push_back(it->second);
        }
        g.edges[{n, (int)ri, i}] = it->second;
      }
    }
  }
  return g;
}

} // namespace chase
