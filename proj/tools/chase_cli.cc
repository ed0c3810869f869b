#include "chase/derivation.hh"
#include "chase/oracle.hh"
#include "chase/termination.hh"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <random>

using nlohmann::json;
using namespace chase;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitFile = 66;
constexpr int kExitDisagreement = 70;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open " << path << "\n";
    std::exit(kExitFile);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json atom_json(const Atom& a) { return to_string(a); }

json edges_json(const std::vector<Edge>& es, const RuleSet& rs) {
  json arr = json::array();
  for (const Edge& e : es)
    arr.push_back({{"rule", rs.rules[e.rule].id}, {"iota", e.iota}});
  return arr;
}

json witness_json(const LassoWitness& w, const RuleSet& rs) {
  json cert = json::array();
  for (const CertNode& c : w.cert)
    cert.push_back({{"node", c.address},
                    {"conditionI", c.condition_i},
                    {"fragileIncrement", c.fragile_increment}});
  return {{"atom", atom_json(w.omega)},
          {"stem", edges_json(w.stem, rs)},
          {"cycle", edges_json(w.cycle, rs)},
          {"certificate", cert}};
}

std::string forest_dot(const Forest& f, const std::set<int>& present) {
  std::ostringstream out;
  out << "digraph forest {\n  node [shape=box];\n";
  for (int n : present)
    out << "  n" << n << " [label=\"" << f.key(n) << " | "
        << to_string(f.adr(n)) << "\"];\n";
  for (int n : present)
    if (f.nodes[n].parent != -1 && present.count(f.nodes[n].parent))
      out << "  n" << f.nodes[n].parent << " -> n" << n << " [label=\""
          << f.rs->rules[f.nodes[n].rule].id << "." << f.nodes[n].iota
          << "\"];\n";
  out << "}\n";
  return out.str();
}

json forest_json(const Forest& f, const std::set<int>& present) {
  json arr = json::array();
  for (int n : present) {
    json e = {{"address", f.key(n)}, {"atom", to_string(f.adr(n))}};
    if (f.nodes[n].parent != -1) e["parent"] = f.key(f.nodes[n].parent);
    arr.push_back(e);
  }
  return arr;
}

int cmd_run(const std::string& rules_path, const std::string& facts_path,
            const std::string& mode, int max_steps,
            const std::string& strategy, unsigned seed,
            const std::string& format) {
  RuleSet rs = parse_ruleset(slurp(rules_path));
  Instance inst = parse_instance(slurp(facts_path), &rs);
  Forest f = make_forest(inst, rs);
  std::set<int> present;
  for (int i = 0; i < f.root_count; ++i) present.insert(i);

  std::mt19937 rng(seed);
  json trace = json::array();
  std::set<Trigger> resolved; // blocked triggers already reported
  int steps = 0;
  while (steps < max_steps) {
    // Pending: active triggers, by node then rule (FIFO on creation order).
    std::vector<Trigger> pending;
    for (int n : present)
      for (size_t ri = 0; ri < rs.rules.size(); ++ri) {
        Trigger t{(int)ri, n};
        if (!is_trigger(f, (int)ri, n)) continue;
        bool done = true;
        for (int i = 1; i <= rs.rules[ri].head_size(); ++i) {
          auto c = f.child(n, (int)ri, i);
          if (!c || !present.count(*c)) done = false;
        }
        if (done || resolved.count(t)) continue;
        pending.push_back(t);
      }
    std::sort(pending.begin(), pending.end(), [](Trigger a, Trigger b) {
      return std::tie(a.node, a.rule) < std::tie(b.node, b.rule);
    });
    if (pending.empty()) break;
    Trigger pick{-1, -1};
    if (strategy == "random") {
      pick = pending[std::uniform_int_distribution<size_t>(
          0, pending.size() - 1)(rng)];
    } else {
      pick = pending[0];
    }
    json entry = {{"rule", rs.rules[pick.rule].id}, {"address", f.key(pick.node)}};
    if (mode == "restricted") {
      std::vector<int> cand(present.begin(), present.end());
      if (auto team = find_blocking_team(f, pick, &cand)) {
        json by = json::array();
        for (int v : *team) by.push_back(f.key(v));
        entry["blockedBy"] = by;
        trace.push_back(entry);
        resolved.insert(pick);
        continue; // resolving a blocked trigger consumes no chase step
      }
    }
    for (int i = 1; i <= rs.rules[pick.rule].head_size(); ++i)
      present.insert(f.ensure_child(pick.node, pick.rule, i));
    trace.push_back(entry);
    ++steps;
  }

  if (format == "dot")
    std::cout << forest_dot(f, present);
  else if (format == "json")
    std::cout << json({{"forest", forest_json(f, present)}}).dump(2) << "\n";
  else
    std::cout << json({{"trace", trace}}).dump(2) << "\n";
  return 0;
}

int cmd_decide(const std::string& rules_path, const Bounds& b) {
  RuleSet rs = parse_ruleset(slurp(rules_path));
  Verdict v = decide(rs, b);
  json out;
  switch (v.kind) {
    case Verdict::Terminating: out["verdict"] = "Terminating"; break;
    case Verdict::NonTerminating: out["verdict"] = "NonTerminating"; break;
    default: out["verdict"] = "Unknown"; break;
  }
  out["bounds"] = {{"maxStem", b.max_stem},
                   {"maxCycle", b.max_cycle},
                   {"checkDepth", b.check_depth}};
  if (v.witness) out["witness"] = witness_json(*v.witness, rs);
  std::cout << out.dump(2) << "\n";
  return v.kind == Verdict::Terminating ? 0
         : v.kind == Verdict::NonTerminating ? 1
                                             : 2;
}

int cmd_oracle(const std::string& rules_path, const std::string& facts_path,
               bool cross, const OracleBounds& ob, const Bounds& db) {
  RuleSet rs = parse_ruleset(slurp(rules_path));
  if (cross) {
    CrossReport rep = cross_validate(rs, db, ob);
    json arr = json::array();
    for (const CrossEntry& e : rep.entries)
      arr.push_back({{"atom", atom_json(e.atom)},
                     {"decideVerdict", e.decide_verdict},
                     {"oracleStatus", e.oracle_status},
                     {"agree", e.agree}});
    std::cout << json({{"report", arr}, {"allAgree", rep.all_agree}}).dump(2)
              << "\n";
    return rep.all_agree ? 0 : kExitDisagreement;
  }
  if (facts_path.empty()) {
    std::cerr << "oracle needs --instance (or --cross-validate)\n";
    return kExitUsage;
  }
  Instance inst = parse_instance(slurp(facts_path), &rs);
  ExplorationResult r = explore(inst, rs, ob);
  json out = {{"status", to_string(r.status)},
              {"bound", r.bound},
              {"longestRun", r.longest_run},
              {"maximalRuns", r.maximal_runs}};
  if (r.status == ExplorationResult::InfinitePattern)
    out["lassoTrace"] = r.lasso_trace;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_graph(const std::string& rules_path, const std::string& atom_text,
              const std::string& format) {
  RuleSet rs = parse_ruleset(slurp(rules_path));
  Atom omega;
  if (!atom_text.empty()) {
    omega = parse_ground_atom(atom_text);
  } else {
    auto atoms = enumerate_critical_atoms(rs);
    if (atoms.empty()) {
      std::cerr << "empty signature, nothing to build\n";
      return kExitUsage;
    }
    omega = atoms[0];
  }
  AbstractGraph g = build_graph(rs, omega);
  if (format == "dot") {
    std::cout << "digraph abstract {\n  node [shape=box];\n";
    for (size_t i = 0; i < g.nodes.size(); ++i)
      std::cout << "  n" << i << " [label=\"" << to_string(g.nodes[i])
                << "\"];\n";
    for (const auto& [key, to] : g.edges) {
      auto [from, rule, iota] = key;
      std::cout << "  n" << from << " -> n" << to << " [label=\""
                << rs.rules[rule].id << "." << iota << "\"];\n";
    }
    std::cout << "}\n";
  } else {
    json nodes = json::array();
    for (const AAtom& a : g.nodes) nodes.push_back(to_string(a));
    json edges = json::array();
    for (const auto& [key, to] : g.edges) {
      auto [from, rule, iota] = key;
      edges.push_back({{"from", from},
                       {"rule", rs.rules[rule].id},
                       {"iota", iota},
                       {"to", to}});
    }
    std::cout << json({{"nodes", nodes}, {"edges", edges}}).dump(2) << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"restricted-chase engine and termination checker for linear "
               "multi-headed existential rules"};
  app.require_subcommand(1);

  std::string rules, facts, atom_text;
  std::string mode = "restricted", strategy = "fifo", format = "trace";
  int max_steps = 100;
  unsigned seed = 0;
  bool seed_set = false;
  Bounds db;
  OracleBounds ob;
  bool cross = false;

  auto* run = app.add_subcommand("run", "run a chase derivation");
  run->add_option("--rules", rules)->required();
  run->add_option("--instance", facts)->required();
  run->add_option("--mode", mode)->check(CLI::IsMember({"oblivious", "restricted"}));
  run->add_option("--max-steps", max_steps);
  run->add_option("--strategy", strategy)->check(CLI::IsMember({"fifo", "random"}));
  run->add_option("--seed", seed)->each([&](const std::string&) { seed_set = true; });
  run->add_option("--format", format)->check(CLI::IsMember({"trace", "dot", "json"}));
  run->add_option("--horizon", max_steps);

  auto* dec = app.add_subcommand("decide", "decide all-instances termination");
  dec->add_option("--rules", rules)->required();
  dec->add_option("--max-stem", db.max_stem);
  dec->add_option("--max-cycle", db.max_cycle);
  dec->add_option("--check-depth", db.check_depth);
  dec->add_option("--horizon", db.check_depth);

  auto* ora = app.add_subcommand("oracle", "brute-force exploration");
  ora->add_option("--rules", rules)->required();
  ora->add_option("--instance", facts);
  ora->add_option("--max-len", ob.max_len);
  ora->add_option("--max-defer", ob.max_defer);
  ora->add_option("--max-stem", db.max_stem);
  ora->add_option("--max-cycle", db.max_cycle);
  ora->add_option("--horizon", ob.max_len);
  ora->add_flag("--cross-validate", cross);

  auto* gra = app.add_subcommand("graph", "export the abstract graph");
  gra->add_option("--rules", rules)->required();
  gra->add_option("--atom", atom_text);
  gra->add_option("--format", format)->check(CLI::IsMember({"dot", "json", "trace"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (run->parsed()) {
      if (strategy == "random" && !seed_set) {
        std::cerr << "--strategy random requires --seed\n";
        return kExitUsage;
      }
      return cmd_run(rules, facts, mode, max_steps, strategy, seed, format);
    }
    if (dec->parsed()) return cmd_decide(rules, db);
    if (ora->parsed()) return cmd_oracle(rules, facts, cross, ob, db);
    if (gra->parsed())
      return cmd_graph(rules, atom_text, format == "trace" ? "json" : format);
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitFile;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitFile;
  }
  return kExitUsage;
}
