#pragma once

// Shared test helpers: a seeded random rule-set generator and independent
// reference implementations used as oracles against the library.

#include "chase/forest.hh"

#include <random>
#include <sstream>

namespace testsupport {

// Random linear rule sets: at most 3 rules, arities at most 3, head size at
// most 2, at most 2 existentials per rule. Generated as source text so the
// parser is exercised on every corpus entry.
inline std::string random_ruleset_text(std::mt19937& rng) {
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  int npred = pick(1, 2);
  std::vector<std::string> preds = {"P", "Q"};
  preds.resize(npred);
  std::vector<int> arity(npred);
  for (int& a : arity) a = pick(1, 3);

  std::ostringstream out;
  int nrules = pick(1, 3);
  for (int r = 0; r < nrules; ++r) {
    int bp = pick(0, npred - 1);
    // Body variable pattern: repeats allowed, from a pool of arity names.
    std::vector<std::string> body(arity[bp]);
    std::set<std::string> body_vars;
    for (auto& v : body) {
      v = "v" + std::to_string(pick(1, arity[bp]));
      body_vars.insert(v);
    }
    std::vector<std::string> bvec(body_vars.begin(), body_vars.end());

    int nhead = pick(1, 2);
    std::vector<std::pair<int, std::vector<std::string>>> head(nhead);
    std::vector<std::string> exists; // declaration order = first occurrence
    for (auto& [hp, hvars] : head) {
      hp = pick(0, npred - 1);
      hvars.resize(arity[hp]);
      for (auto& v : hvars) {
        if (pick(0, 2) == 0) { // existential
          v = "z" + std::to_string(pick(1, 2));
          if (std::find(exists.begin(), exists.end(), v) == exists.end())
            exists.push_back(v);
        } else {
          v = bvec[pick(0, (int)bvec.size() - 1)];
        }
      }
    }
    out << "rule k" << r << " : " << preds[bp] << "(";
    for (size_t i = 0; i < body.size(); ++i)
      out << (i ? "," : "") << body[i];
    out << ") -> ";
    if (!exists.empty()) {
      out << "exists";
      for (const auto& z : exists) out << " " << z;
      out << " . ";
    }
    for (int h = 0; h < nhead; ++h) {
      if (h) out << ", ";
      out << preds[head[h].first] << "(";
      for (size_t i = 0; i < head[h].second.size(); ++i)
        out << (i ? "," : "") << head[h].second[i];
      out << ")";
    }
    out << " .\n";
  }
  return out.str();
}

// Independent blocking oracle: the trigger is blocked by the team iff the
// body match extends to a homomorphism sending head atom i onto the team's
// i-th atom. Built on substitution unification rather than the positional
// condition sweep of is_blocking_team.
inline bool blocks_hom(const chase::Forest& f, const std::vector<int>& team,
                       chase::Trigger t) {
  using namespace chase;
  const Rule& r = f.rs->rules[t.rule];
  if ((int)team.size() != r.head_size()) return false;
  auto m = body_match(r, f.adr(t.node));
  if (!m) return false;
  std::map<std::string, Term> ext = *m;
  for (int i = 0; i < r.head_size(); ++i) {
    const Atom& a = f.adr(team[i]);
    if (a.pred != r.head[i].pred) return false;
    if (a.args.size() != r.head[i].vars.size()) return false;
    for (size_t j = 0; j < a.args.size(); ++j) {
      auto [it, fresh] = ext.emplace(r.head[i].vars[j], a.args[j]);
      if (!fresh && !(it->second == a.args[j])) return false;
    }
  }
  return true;
}

// Frontier positions recomputed by a plain variable scan over the rule text
// structures, independent of frontier_positions.
inline std::map<int, std::set<int>> frontier_scan(const chase::Rule& r) {
  std::set<std::string> bv(r.body.vars.begin(), r.body.vars.end());
  std::map<int, std::set<int>> out;
  for (size_t h = 0; h < r.head.size(); ++h) {
    out[(int)h + 1] = {};
    for (size_t j = 0; j < r.head[h].vars.size(); ++j)
      if (bv.count(r.head[h].vars[j])) out[(int)h + 1].insert((int)j + 1);
  }
  return out;
}

// Canonical form of a ground atom under constant renaming: equality pattern
// of the positions. Two atoms are isomorphic iff the patterns coincide.
inline std::vector<int> iso_pattern(const chase::Atom& a) {
  std::map<chase::Term, int> idx;
  std::vector<int> out;
  for (const auto& t : a.args) out.push_back(idx.emplace(t, (int)idx.size()).first->second);
  return out;
}

} // namespace testsupport
