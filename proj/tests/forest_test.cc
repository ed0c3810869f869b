#include <doctest.h>

#include "chase/forest.hh"
#include "support/random_rules.hh"

using namespace chase;

static RuleSet chain_rules() {
  return parse_ruleset("rule r1 : R(x,y) -> exists z . R(y,z) .\n"
                       "rule r2 : R(x,y) -> R(y,y) .\n");
}

static RuleSet split_rules() {
  return parse_ruleset(
      "rule g : R(x,u,u) -> exists y . R(x,y,u), R(y,u,u) .\n"
      "rule d : R(y,u,u) -> R(u,u,u) .\n");
}

TEST_CASE("rule_apply substitutes the frontier and mints nulls") {
  RuleSet rs = chain_rules();
  Atom at{"R", {make_const("a0"), make_const("a1")}};
  auto out = rule_apply(rs.rules[0], at, "R(a0,a1)");
  REQUIRE(out.size() == 1);
  CHECK(out[0].args[0] == make_const("a1"));
  CHECK(out[0].args[1] == make_null("z", "R(a0,a1)", "r1"));
  // Same address, same null; different address, different null.
  CHECK(rule_apply(rs.rules[0], at, "R(a0,a1)") == out);
  CHECK(rule_apply(rs.rules[0], at, "other")[0].args[1] !=
        out[0].args[1]);
}

TEST_CASE("rule_apply shares one null across a two-atom head") {
  RuleSet rs = split_rules();
  Atom at{"R", {make_const("a"), make_const("b"), make_const("b")}};
  auto out = rule_apply(rs.rules[0], at, "w");
  REQUIRE(out.size() == 2);
  CHECK(out[0].args[1] == out[1].args[0]); // the shared existential y
  CHECK(!out[0].args[1].is_const());
  CHECK(out[0].args[0] == make_const("a"));
  CHECK(out[1].args[2] == make_const("b"));
}

TEST_CASE("body_match handles repeated body variables") {
  RuleSet rs = split_rules();
  Atom good{"R", {make_const("a"), make_const("b"), make_const("b")}};
  Atom bad{"R", {make_const("a"), make_const("b"), make_const("c")}};
  CHECK(body_match(rs.rules[0], good).has_value());
  CHECK(!body_match(rs.rules[0], bad).has_value());
  CHECK_THROWS_AS(rule_apply(rs.rules[0], bad, "w"), NoMatch);
}

TEST_CASE("forest labels depend on the address alone") {
  RuleSet rs = chain_rules();
  Instance inst = parse_instance("R(a0,a1)");
  Forest f = make_forest(inst, rs);
  REQUIRE(f.root_count == 1);
  int c1 = f.ensure_child(0, 0, 1);
  Atom before = f.adr(c1);
  std::string key_before = f.key(c1);
  f.expand_all(4);
  CHECK(f.adr(c1) == before);
  CHECK(f.key(c1) == key_before);
  // expand() agrees with expand_all on node count at equal depth.
  Forest g = expand(inst, rs, 4);
  CHECK(g.nodes.size() == f.nodes.size());
  // Depths never exceed the horizon.
  for (size_t n = 0; n < g.nodes.size(); ++n) CHECK(g.depth((int)n) <= 4);
}

TEST_CASE("child lookup does not materialize") {
  RuleSet rs = chain_rules();
  Forest f = make_forest(parse_instance("R(a0,a1)"), rs);
  CHECK(!f.child(0, 0, 1).has_value());
  int c = f.ensure_child(0, 0, 1);
  CHECK(f.child(0, 0, 1) == c);
  CHECK(f.is_prefix(0, c));
  CHECK(!f.is_prefix(c, 0));
  CHECK(f.word(c) == std::vector<std::pair<int, int>>{{0, 1}});
}

TEST_CASE("known blocking patterns on the splitter rules") {
  RuleSet rs = split_rules();
  Forest f = make_forest(parse_instance("R(a,b,b)"), rs);
  int g1 = f.ensure_child(0, 0, 1); // R(a,y0,b)
  int g2 = f.ensure_child(0, 0, 2); // R(y0,b,b)
  int d1 = f.ensure_child(0, 1, 1); // R(b,b,b)

  // g at the root is not blocked by two copies of the root.
  CHECK(!is_blocking_team(f, {0, 0}, Trigger{0, 0}));
  // g at g2 is blocked by [g2, d1]: the splitter's output is covered.
  CHECK(is_blocking_team(f, {g2, d1}, Trigger{0, g2}));
  // d at g2 is blocked by the collapsed atom.
  CHECK(is_blocking_team(f, {d1}, Trigger{1, g2}));
  // ... but not by g1, whose frontier positions disagree.
  CHECK(!is_blocking_team(f, {g1}, Trigger{1, g2}));
  // Team arity must match the head size.
  CHECK(!is_blocking_team(f, {d1}, Trigger{0, g2}));

  auto team = find_blocking_team(f, Trigger{0, g2});
  REQUIRE(team.has_value());
  CHECK(is_blocking_team(f, *team, Trigger{0, g2}));
  // With only the root available g at the root is unblocked; once the
  // collapsed atom exists, [root, d1] covers it.
  std::vector<int> root_only{0};
  CHECK(!find_blocking_team(f, Trigger{0, 0}, &root_only).has_value());
  auto t0 = find_blocking_team(f, Trigger{0, 0});
  REQUIRE(t0.has_value());
  CHECK(*t0 == std::vector<int>{0, d1});
}

TEST_CASE("a trigger's own children block it") {
  std::mt19937 rng(421);
  for (int iter = 0; iter < 80; ++iter) {
    RuleSet rs = parse_ruleset(testsupport::random_ruleset_text(rng));
    for (const Atom& omega : enumerate_critical_atoms(rs)) {
      Instance inst;
      inst.facts.push_back(omega);
      Forest f = make_forest(inst, rs);
      f.expand_all(2, 500);
      for (size_t n = 0; n < f.nodes.size(); ++n)
        for (size_t r = 0; r < rs.rules.size(); ++r) {
          if (!is_trigger(f, (int)r, (int)n)) continue;
          std::vector<int> kids;
          bool have_all = true;
          for (int i = 1; i <= rs.rules[r].head_size(); ++i) {
            auto c = f.child((int)n, (int)r, i);
            if (!c) { have_all = false; break; }
            kids.push_back(*c);
          }
          if (have_all)
            CHECK(is_blocking_team(f, kids, Trigger{(int)r, (int)n}));
        }
    }
  }
}

TEST_CASE("blocking agrees with the homomorphism oracle on random forests") {
  std::mt19937 rng(90125);
  long pairs = 0;
  for (int iter = 0; iter < 60; ++iter) {
    RuleSet rs = parse_ruleset(testsupport::random_ruleset_text(rng));
    auto atoms = enumerate_critical_atoms(rs);
    if (atoms.empty()) continue;
    Instance inst;
    inst.facts.push_back(atoms[iter % atoms.size()]);
    Forest f = make_forest(inst, rs);
    f.expand_all(3, 200);
    int n = (int)f.nodes.size();
    for (int node = 0; node < n; ++node)
      for (size_t r = 0; r < rs.rules.size(); ++r) {
        if (!is_trigger(f, (int)r, node)) continue;
        Trigger t{(int)r, node};
        int k = rs.rules[r].head_size();
        // All tuples on small forests, random tuples otherwise.
        std::vector<std::vector<int>> teams;
        if ((k == 1 && n <= 200) || (k == 2 && n <= 40)) {
          std::vector<int> tup(k);
          auto rec = [&](auto&& self, int i) -> void {
            if (i == k) { teams.push_back(tup); return; }
            for (int v = 0; v < n; ++v) { tup[i] = v; self(self, i + 1); }
          };
          rec(rec, 0);
        } else {
          std::uniform_int_distribution<int> d(0, n - 1);
          for (int s = 0; s < 300; ++s) {
            std::vector<int> tup(k);
            for (int& v : tup) v = d(rng);
            teams.push_back(std::move(tup));
          }
        }
        for (const auto& team : teams) {
          ++pairs;
          CHECK(is_blocking_team(f, team, t) ==
                testsupport::blocks_hom(f, team, t));
        }
      }
  }
  CHECK(pairs > 10000);
}

TEST_CASE("trigger_children_atoms matches materialized children") {
  RuleSet rs = split_rules();
  Forest f = make_forest(parse_instance("R(a,b,b)"), rs);
  auto atoms = trigger_children_atoms(f, Trigger{0, 0});
  REQUIRE(atoms.size() == 2);
  CHECK(atoms[0] == f.adr(f.ensure_child(0, 0, 1)));
  CHECK(atoms[1] == f.adr(f.ensure_child(0, 0, 2)));
}
