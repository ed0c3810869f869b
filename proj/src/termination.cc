#include "chase/termination.hh"

#include <algorithm>
#include <sstream>

namespace chase {

namespace {

constexpr long kNodeCap = 60000;    // breadth cap for off-path expansion
constexpr long kComboCap = 200000;  // team combinations examined per trigger
constexpr long kLassoCap = 20000;   // candidate lassos verified per atom
constexpr long kEnumCap = 2000000;  // enumeration steps per atom

// Enumerates k-tuples over cands and stops when test returns true.
bool any_tuple(const std::vector<int>& cands, int k,
               const std::function<bool(const std::vector<int>&)>& test) {
  std::vector<int> tup(k);
  auto rec = [&](auto&& self, int i) -> bool {
    if (i == k) return test(tup);
    for (int c : cands) {
      tup[i] = c;
      if (self(self, i + 1)) return true;
    }
    return false;
  };
  return rec(rec, 0);
}

} // namespace

PathContext make_path_context(Forest& f, const std::vector<Edge>& stem,
                              const std::vector<Edge>& cycle, int len) {
  PathContext ctx;
  ctx.f = &f;
  ctx.stem = stem;
  ctx.cycle = cycle;
  int cur = 0;
  ctx.path.push_back(cur);
  ctx.pset.insert(cur);
  for (int i = 0; i < len; ++i) {
    Edge e;
    if (i < (int)stem.size()) {
      e = stem[i];
    } else {
      if (cycle.empty()) throw MalformedWitness("path runs out of edges");
      e = cycle[(i - stem.size()) % cycle.size()];
    }
    if (e.rule < 0 || e.rule >= (int)f.rs->rules.size())
      throw MalformedWitness("unknown rule on the path");
    const Rule& r = f.rs->rules[e.rule];
    if (e.iota < 1 || e.iota > r.head_size())
      throw MalformedWitness("head index out of range");
    if (!is_trigger(f, e.rule, cur))
      throw MalformedWitness("rule does not fire on the path atom");
    int next = -1;
    for (int k = 1; k <= r.head_size(); ++k) {
      int ch = f.ensure_child(cur, e.rule, k);
      ctx.pset.insert(ch);
      if (k == e.iota) next = ch;
    }
    ctx.path_rule.push_back(e.rule);
    cur = next;
    ctx.path.push_back(cur);
  }
  return ctx;
}

std::pair<std::set<int>, std::set<int>> bfr_any(const PathContext& ctx,
                                                int u_idx, int horizon) {
  const Forest& f = *ctx.f;
  int u = ctx.path.at(u_idx);
  if (f.depth(u) > horizon) throw HorizonTooSmall();
  std::set<int> bfr, any;
  for (int v : ctx.pset)
    if (f.depth(v) <= f.depth(u)) bfr.insert(v);
  for (size_t n = 0; n < f.nodes.size(); ++n)
    if (f.depth((int)n) <= horizon && !ctx.pset.count((int)n) &&
        !f.is_prefix(u, (int)n))
      any.insert((int)n);
  return {bfr, any};
}

bool condition_i(const PathContext& ctx, const AbstractLabeling& l, int u_idx) {
  const Forest& f = *ctx.f;
  int u = ctx.path.at(u_idx);
  Trigger t{ctx.path_rule.at(u_idx), u};
  std::vector<int> cands;
  for (int v : ctx.pset)
    if (f.depth(v) <= f.depth(u)) cands.push_back(v);
  int k = f.rs->rules[t.rule].head_size();
  return !any_tuple(cands, k, [&](const std::vector<int>& team) {
    return blocks_abstract(l, team, t);
  });
}

std::string equiv_key(const Forest& f, int u, int v) {
  const Atom& au = f.adr(u);
  const Atom& av = f.adr(v);
  std::ostringstream key;
  key << av.pred;
  // Terms of adr(u) keep their identity (by first position in adr(u));
  // everything else is anonymized to its equality pattern.
  std::map<Term, int> anon;
  for (const Term& t : av.args) {
    auto hit = std::find(au.args.begin(), au.args.end(), t);
    if (hit != au.args.end()) {
      key << "|u" << (hit - au.args.begin());
    } else {
      auto [it, fresh] = anon.emplace(t, (int)anon.size());
      key << "|x" << it->second;
    }
  }
  return key.str();
}

namespace {

// Joint class key of a team relative to u. Only members of any(u) | bfr(u)
// may be anonymized up to the terms of adr(u); members of the path set
// deeper than u keep their identity, their terms interact with the path
// below u through more than adr(u).
std::string tuple_equiv_key(const PathContext& ctx, int u,
                            const std::vector<int>& vs) {
  const Forest& f = *ctx.f;
  const Atom& au = f.adr(u);
  std::ostringstream key;
  std::map<Term, int> anon; // shared across the tuple: joint pattern
  for (int v : vs) {
    if (ctx.pset.count(v) && f.depth(v) > f.depth(u)) {
      key << "@" << v << ";";
      continue;
    }
    const Atom& av = f.adr(v);
    key << av.pred;
    for (const Term& t : av.args) {
      auto hit = std::find(au.args.begin(), au.args.end(), t);
      if (hit != au.args.end())
        key << "|u" << (hit - au.args.begin());
      else {
        auto [it, fresh] = anon.emplace(t, (int)anon.size());
        key << "|x" << it->second;
      }
    }
    key << ";";
  }
  return key.str();
}

} // namespace

std::set<int> harm2(const PathContext& ctx, int u_idx, int v, int s,
                    int horizon) {
  Forest& f = *ctx.f;
  std::set<int> out;
  for (int w = u_idx; w < (int)ctx.path_rule.size(); ++w) {
    if (f.depth(ctx.path[w]) > horizon) break;
    Trigger t{ctx.path_rule[w], ctx.path[w]};
    if (is_blocking_team(f, {v, s}, t)) out.insert(w);
  }
  return out;
}

std::set<int> harm1(const PathContext& ctx, int u_idx, int v, int horizon) {
  Forest& f = *ctx.f;
  std::set<int> out;
  for (int w = u_idx; w < (int)ctx.path_rule.size(); ++w) {
    if (f.depth(ctx.path[w]) > horizon) break;
    Trigger t{ctx.path_rule[w], ctx.path[w]};
    for (int s : ctx.pset) {
      if (f.depth(s) <= f.depth(ctx.path[u_idx])) continue; // bfr(u) excluded
      if (f.depth(s) > f.depth(ctx.path[w])) continue;
      if (is_blocking_team(f, {v, s}, t)) {
        out.insert(w);
        break;
      }
    }
  }
  return out;
}

std::set<int> fragile(const PathContext& ctx, int u_idx, int horizon) {
  Forest& f = *ctx.f;
  int u = ctx.path.at(u_idx);
  if (f.depth(u) > horizon) throw HorizonTooSmall();
  auto [bfr_u, any_u] = bfr_any(ctx, u_idx, horizon);
  std::set<int> out;
  std::map<std::string, bool> memo; // (w, ~ tuple class) -> blocks
  for (int w = u_idx; w < (int)ctx.path_rule.size(); ++w) {
    if (f.depth(ctx.path[w]) > horizon) break;
    Trigger t{ctx.path_rule[w], ctx.path[w]};
    int k = f.rs->rules[t.rule].head_size();
    std::vector<int> cands(any_u.begin(), any_u.end());
    for (int v : ctx.pset)
      if (f.depth(v) <= f.depth(ctx.path[w])) cands.push_back(v);
    bool hit = any_tuple(cands, k, [&](const std::vector<int>& team) {
      std::string key = std::to_string(w) + "#" + tuple_equiv_key(ctx, u, team);
      auto it = memo.find(key);
      if (it != memo.end()) return it->second;
      bool b = is_blocking_team(f, team, t);
      memo.emplace(std::move(key), b);
      return b;
    });
    if (hit) out.insert(w);
  }
  return out;
}

std::vector<std::vector<int>> equiv_classes(const PathContext& ctx, int u_idx,
                                            int horizon) {
  const Forest& f = *ctx.f;
  auto [bfr_u, any_u] = bfr_any(ctx, u_idx, horizon);
  std::map<std::string, std::vector<int>> by_key;
  int u = ctx.path.at(u_idx);
  for (int v : bfr_u) by_key[equiv_key(f, u, v)].push_back(v);
  for (int v : any_u) by_key[equiv_key(f, u, v)].push_back(v);
  std::vector<std::vector<int>> out;
  for (auto& [k, vs] : by_key) out.push_back(std::move(vs));
  return out;
}

namespace {

struct VerifyParams {
  int path_len;   // edges materialized: stem + 2 (or more) cycle turns
  int w_begin;    // fragility: w ranges over [w_begin, path_len)
  int u_end;      // fragility: u ranges over [0, u_end)
  bool use_abstract = true;
};

enum class LassoCheck { Ok, Fail };

// Shared checker behind find_witness (abstract blocking) and check_witness
// (concrete blocking). Returns Fail with no certificate, or Ok and fills
// cert when requested.
LassoCheck verify_lasso(const RuleSet& rs, const Atom& omega,
                        const std::vector<Edge>& stem,
                        const std::vector<Edge>& cycle, const VerifyParams& p,
                        std::vector<CertNode>* cert_out) {
  Instance inst;
  inst.facts.push_back(omega);
  Forest f = make_forest(inst, rs);
  PathContext ctx = make_path_context(f, stem, cycle, p.path_len);

  AbstractLabeling lab;
  auto blocked_by = [&](const std::vector<int>& team, Trigger t) {
    if (p.use_abstract) return blocks_abstract(lab, team, t);
    return is_blocking_team(f, team, t);
  };
  if (p.use_abstract) lab = abstractize(f);

  // Condition (i) along the whole materialized path.
  for (int u = 0; u < p.path_len; ++u) {
    Trigger t{ctx.path_rule[u], ctx.path[u]};
    std::vector<int> cands;
    for (int v : ctx.pset)
      if (f.depth(v) <= f.depth(ctx.path[u])) cands.push_back(v);
    int k = rs.rules[t.rule].head_size();
    if (any_tuple(cands, k,
                  [&](const std::vector<int>& team) { return blocked_by(team, t); }))
      return LassoCheck::Fail;
  }

  // Per-period fragile increment. Missing teams can only be caused by the
  // breadth or combination caps, which err toward accepting; the concrete
  // replay and the oracle guard that side. Blocking on the expanded forest
  // is always checked concretely; blocks_abstract agrees with it and was
  // already exercised on the path above. Most rejecting teams are shallow,
  // so a cheap shallow expansion is tried before the full one.
  auto fragile_scan = [&]() -> bool {
  for (int w = p.w_begin; w < p.path_len; ++w) {
    Trigger t{ctx.path_rule[w], ctx.path[w]};
    const Rule& r = rs.rules[t.rule];
    auto match = body_match(r, f.adr(ctx.path[w]));
    int k = r.head_size();
    // Per-slot candidates: predicate fits and frontier positions carry the
    // matched terms.
    std::vector<std::vector<int>> slot(k);
    for (size_t n = 0; n < f.nodes.size(); ++n) {
      const Atom& a = f.adr((int)n);
      for (int i = 0; i < k; ++i) {
        if (a.pred != r.head[i].pred) continue;
        if (a.args.size() != r.head[i].vars.size()) continue;
        bool ok = true;
        for (size_t j = 0; ok && j < r.head[i].vars.size(); ++j)
          if (r.frontier.count(r.head[i].vars[j]) &&
              a.args[j] != match->at(r.head[i].vars[j]))
            ok = false;
        if (ok) slot[i].push_back((int)n);
      }
    }
    long combos = 0;
    bool fragile_hit = false;
    std::vector<int> tup(k);
    auto admissible_somewhere = [&](const std::vector<int>& team) {
      for (int u = 0; u < p.u_end; ++u) {
        int un = ctx.path[u];
        bool ok = true;
        for (int v : team) {
          bool in_bfr_w =
              ctx.pset.count(v) && f.depth(v) <= f.depth(ctx.path[w]);
          bool in_any_u = !ctx.pset.count(v) && !f.is_prefix(un, v);
          if (!in_bfr_w && !in_any_u) { ok = false; break; }
        }
        if (ok) return true;
      }
      return false;
    };
    auto rec = [&](auto&& self, int i) -> void {
      if (fragile_hit || combos > kComboCap) return;
      if (i == k) {
        ++combos;
        if (is_blocking_team(f, tup, t) && admissible_somewhere(tup))
          fragile_hit = true;
        return;
      }
      for (int c : slot[i]) {
        tup[i] = c;
        self(self, i + 1);
      }
    };
    rec(rec, 0);
    if (fragile_hit) return true;
  }
  return false;
  };

  constexpr int kShallowHorizon = 4;
  f.expand_all(std::min(p.path_len, kShallowHorizon), kNodeCap);
  if (fragile_scan()) return LassoCheck::Fail;
  if (p.path_len > kShallowHorizon) {
    f.expand_all(p.path_len, kNodeCap);
    if (fragile_scan()) return LassoCheck::Fail;
  }

  if (cert_out) {
    cert_out->clear();
    for (int u = 0; u < p.u_end; ++u)
      cert_out->push_back(CertNode{f.key(ctx.path[u]), true, {}});
  }
  return LassoCheck::Ok;
}

// Follows the edge sequence in the abstract graph; nullopt when an edge is
// missing. Returns the node reached.
std::optional<int> walk_graph(const AbstractGraph& g, int from,
                              const std::vector<Edge>& edges) {
  int cur = from;
  for (const Edge& e : edges) {
    auto it = g.edges.find({cur, e.rule, e.iota});
    if (it == g.edges.end()) return std::nullopt;
    cur = it->second;
  }
  return cur;
}

} // namespace

SearchOutcome find_witness(const RuleSet& rs, const Atom& omega,
                           const Bounds& b) {
  SearchOutcome out;
  AbstractGraph g = build_graph(rs, omega);
  out.graph_nodes = (int)g.nodes.size();

  // Sorted outgoing edges per node.
  std::map<int, std::vector<std::pair<Edge, int>>> succ;
  for (const auto& [key, to] : g.edges) {
    auto [from, rule, iota] = key;
    succ[from].push_back({Edge{rule, iota}, to});
  }
  for (auto& [n, es] : succ)
    std::sort(es.begin(), es.end());

  long verified = 0, steps = 0;
  bool budget_hit = false;
  std::vector<Edge> stem, cycle;
  std::optional<LassoWitness> found;

  // One concrete forest shared by the whole search. Paths are pushed and
  // popped; condition (i) at a path node depends only on the prefix up to
  // that node, so a failure prunes every lasso passing through it. The
  // memo key (node, rule) is sound because a node id fixes its address and
  // hence the whole prefix.
  Instance inst;
  inst.facts.push_back(omega);
  Forest f = make_forest(inst, rs);
  std::vector<int> path{0};
  std::vector<int> pvec{0}; // path plus twins, in creation order
  std::map<std::pair<int, int>, bool> blocked_memo;

  auto trigger_blocked = [&](int cur, int rule) {
    auto key = std::make_pair(cur, rule);
    auto it = blocked_memo.find(key);
    if (it != blocked_memo.end()) return it->second;
    std::vector<int> cands;
    for (int v : pvec)
      if (f.depth(v) <= f.depth(cur)) cands.push_back(v);
    bool b = find_blocking_team(f, Trigger{rule, cur}, &cands).has_value();
    blocked_memo.emplace(key, b);
    return b;
  };
  // Returns the number of children pushed, or -1 when condition (i) fails.
  auto push_edge = [&](Edge e) -> int {
    int cur = path.back();
    if (!is_trigger(f, e.rule, cur)) return -1;
    if (trigger_blocked(cur, e.rule)) return -1;
    const Rule& r = rs.rules[e.rule];
    int next = -1;
    for (int k = 1; k <= r.head_size(); ++k) {
      int ch = f.ensure_child(cur, e.rule, k);
      pvec.push_back(ch);
      if (k == e.iota) next = ch;
    }
    path.push_back(next);
    return r.head_size();
  };
  auto pop_edge = [&](int pushed) {
    path.pop_back();
    pvec.resize(pvec.size() - pushed);
  };

  auto try_candidate = [&]() -> bool {
    if (++verified > kLassoCap) { budget_hit = true; return true; }
    VerifyParams p;
    p.path_len = (int)stem.size() + 2 * (int)cycle.size();
    p.w_begin = (int)(stem.size() + cycle.size());
    p.u_end = p.w_begin;
    p.use_abstract = true;
    std::vector<CertNode> cert;
    LassoCheck r;
    try {
      r = verify_lasso(rs, omega, stem, cycle, p, &cert);
    } catch (const MalformedWitness&) {
      return false;
    }
    if (r != LassoCheck::Ok) return false;
    found = LassoWitness{omega, stem, cycle, std::move(cert)};
    return true;
  };

  // Lexicographic search: stem length, cycle length, then edge order.
  for (int sl = 0; sl <= b.max_stem && !found && !budget_hit; ++sl)
    for (int cl = 1; cl <= b.max_cycle && !found && !budget_hit; ++cl) {
      // DFS over stems of exactly sl edges, then cycles of exactly cl edges
      // returning to the stem end.
      auto cyc_rec = [&](auto&& self, int at, int start, int left) -> bool {
        if (++steps > kEnumCap) { budget_hit = true; return true; }
        if (left == 0) {
          if (at != start) return false;
          return try_candidate();
        }
        for (const auto& [e, to] : succ[at]) {
          int pushed = push_edge(e);
          if (pushed < 0) continue;
          cycle.push_back(e);
          bool stop = self(self, to, start, left - 1);
          cycle.pop_back();
          pop_edge(pushed);
          if (stop) return true;
        }
        return false;
      };
      auto stem_rec = [&](auto&& self, int at, int left) -> bool {
        if (++steps > kEnumCap) { budget_hit = true; return true; }
        if (left == 0) return cyc_rec(cyc_rec, at, at, cl);
        for (const auto& [e, to] : succ[at]) {
          int pushed = push_edge(e);
          if (pushed < 0) continue;
          stem.push_back(e);
          bool stop = self(self, to, left - 1);
          stem.pop_back();
          pop_edge(pushed);
          if (stop) return true;
        }
        return false;
      };
      stem_rec(stem_rec, 0, sl);
    }

  out.witness = found;
  out.exhausted_cleanly = !budget_hit;
  return out;
}

bool check_witness(const RuleSet& rs, const LassoWitness& w, int depth) {
  if (w.cycle.empty()) throw MalformedWitness("empty cycle");
  AbstractGraph g = build_graph(rs, w.omega);
  auto stem_end = walk_graph(g, 0, w.stem);
  if (!stem_end) throw MalformedWitness("stem leaves the abstract graph");
  auto back = walk_graph(g, *stem_end, w.cycle);
  if (!back || *back != *stem_end)
    throw MalformedWitness("cycle does not return to the stem end");

  int sl = (int)w.stem.size(), cl = (int)w.cycle.size();
  int turns = std::max(2, (depth - sl + cl - 1) / cl);
  VerifyParams p;
  p.path_len = sl + turns * cl;
  p.w_begin = sl + cl;
  p.u_end = sl + cl;
  p.use_abstract = false;
  return verify_lasso(rs, w.omega, w.stem, w.cycle, p, nullptr) ==
         LassoCheck::Ok;
}

Verdict decide(const RuleSet& rs, const Bounds& b) {
  Verdict v;
  v.used = b;
  bool all_covered = true;
  bool witness_failed = false;
  auto atoms = enumerate_critical_atoms(rs);
  for (size_t ai = 0; ai < atoms.size(); ++ai) {
    SearchOutcome so = find_witness(rs, atoms[ai], b);
    if (so.witness) {
      int d = 2 * ((int)so.witness->stem.size() +
                   2 * (int)so.witness->cycle.size());
      if (check_witness(rs, *so.witness, d)) {
        v.kind = Verdict::NonTerminating;
        v.witness = so.witness;
        v.atom_index = (int)ai;
        return v;
      }
      witness_failed = true;
      continue;
    }
    if (!so.exhausted_cleanly || b.max_stem < so.graph_nodes ||
        b.max_cycle < so.graph_nodes)
      all_covered = false;
  }
  v.kind = (all_covered && !witness_failed) ? Verdict::Terminating
                                            : Verdict::Unknown;
  return v;
}

} // namespace chase
