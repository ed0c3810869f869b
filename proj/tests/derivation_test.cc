#include <doctest.h>

#include "chase/derivation.hh"
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

TEST_CASE("replay grows the present set stepwise") {
  RuleSet rs = chain_rules();
  Forest f = make_forest(parse_instance("R(a0,a1)"), rs);
  Derivation d{{Trigger{0, 0}, Trigger{1, 0}}};
  auto steps = replay(f, d);
  REQUIRE(steps.size() == 3);
  CHECK(steps[0].size() == 1);
  CHECK(steps[1].size() == 2);
  CHECK(steps[2].size() == 3);
  CHECK(steps[0].count(0) == 1);

  // Re-applying a trigger whose children are present is malformed.
  Derivation twice{{Trigger{0, 0}, Trigger{0, 0}}};
  Forest f2 = make_forest(parse_instance("R(a0,a1)"), rs);
  CHECK_THROWS_AS(replay(f2, twice), MalformedDerivation);
  // A trigger at a node that is not yet present is malformed.
  Forest f3 = make_forest(parse_instance("R(a0,a1)"), rs);
  int deep = f3.ensure_child(f3.ensure_child(0, 0, 1), 0, 1);
  Derivation skip{{Trigger{0, deep}}};
  CHECK_THROWS_AS(replay(f3, skip), MalformedDerivation);
}

TEST_CASE("restricted validation flags blocked applications") {
  RuleSet rs = split_rules();
  Forest f = make_forest(parse_instance("R(a,b,b)"), rs);
  Derivation ok{{Trigger{0, 0}, Trigger{1, 0}}};
  auto rep = validate_derivation(f, ok, DerivationKind::Restricted, 10);
  CHECK(rep.ok);
  CHECK(rep.violation_step == -1);

  Forest f2 = make_forest(parse_instance("R(a,b,b)"), rs);
  int g2 = f2.ensure_child(0, 0, 2);
  Derivation bad{{Trigger{0, 0}, Trigger{1, 0}, Trigger{0, g2}}};
  auto rep2 = validate_derivation(f2, bad, DerivationKind::Restricted, 10);
  CHECK(!rep2.ok);
  CHECK(rep2.violation_step == 2);
}

TEST_CASE("oblivious validation compares against the full forest") {
  RuleSet rs = chain_rules();
  Forest f = make_forest(parse_instance("R(a0,a1)"), rs);
  int a = f.ensure_child(0, 0, 1);
  int b = f.ensure_child(0, 1, 1);
  Derivation d{{Trigger{0, 0}, Trigger{1, 0}, Trigger{0, a}, Trigger{1, a},
                Trigger{0, b}, Trigger{1, b}}};
  CHECK(validate_derivation(f, d, DerivationKind::Oblivious, 2).ok);
  Forest f2 = make_forest(parse_instance("R(a0,a1)"), rs);
  CHECK(!validate_derivation(f2, d, DerivationKind::Oblivious, 3).ok);
}

TEST_CASE("fair validation reports starving triggers on prefixes") {
  RuleSet rs = split_rules();
  Forest f = make_forest(parse_instance("R(a,b,b)"), rs);
  Derivation full{{Trigger{0, 0}, Trigger{1, 0}}};
  auto rep = validate_derivation(f, full, DerivationKind::Fair, 10);
  CHECK(rep.ok);
  CHECK(rep.starving.empty()); // everything left is blocked

  Forest f2 = make_forest(parse_instance("R(a,b,b)"), rs);
  Derivation prefix{{Trigger{0, 0}}};
  auto rep2 = validate_derivation(f2, prefix, DerivationKind::Fair, 10);
  CHECK(!rep2.ok); // a prefix with leftovers is not fair yet
  REQUIRE(rep2.starving.size() >= 1);
  bool has_d_root = false;
  for (Trigger t : rep2.starving)
    if (t.rule == 1 && t.node == 0) has_d_root = true;
  CHECK(has_d_root);
}

TEST_CASE("mixed-derivation check") {
  RuleSet rs = split_rules();
  Forest f = make_forest(parse_instance("R(a,b,b)"), rs);
  int g2 = f.ensure_child(0, 0, 2);
  int d1 = f.ensure_child(0, 1, 1);
  Derivation m{{Trigger{0, 0}, Trigger{1, 0}, Trigger{0, g2}, Trigger{1, d1}}};
  Derivation r{{Trigger{0, 0}, Trigger{1, 0}}};
  CHECK(check_mixed(f, m, r));

  // Not a subsequence: order swapped.
  Derivation r_swapped{{Trigger{1, 0}, Trigger{0, 0}}};
  CHECK(!check_mixed(f, m, r_swapped));

  // Shared trigger blocked at its oblivious position.
  Derivation r_blocked{{Trigger{0, 0}, Trigger{0, g2}}};
  CHECK(!check_mixed(f, m, r_blocked));
}

TEST_CASE("restrict_derivation yields a valid restricted derivation") {
  RuleSet rs = split_rules();
  Forest f = make_forest(parse_instance("R(a,b,b)"), rs);
  int g2 = f.ensure_child(0, 0, 2);
  int d1 = f.ensure_child(0, 1, 1);
  Derivation m{{Trigger{0, 0}, Trigger{1, 0}, Trigger{0, g2}, Trigger{1, d1}}};
  Derivation r = restrict_derivation(f, m);
  std::vector<Trigger> want{Trigger{0, 0}, Trigger{1, 0}};
  CHECK(r.triggers == want);
  CHECK(validate_derivation(f, r, DerivationKind::Restricted, 10).ok);
  CHECK(check_mixed(f, m, r));
}

TEST_CASE("restriction of random oblivious derivations stays restricted") {
  std::mt19937 rng(5150);
  for (int iter = 0; iter < 60; ++iter) {
    RuleSet rs = parse_ruleset(testsupport::random_ruleset_text(rng));
    auto atoms = enumerate_critical_atoms(rs);
    if (atoms.empty()) continue;
    Instance inst;
    inst.facts.push_back(atoms[0]);
    Forest f = make_forest(inst, rs);
    // Breadth-first oblivious prefix.
    Derivation m;
    std::set<int> present{0};
    for (int round = 0; round < 3; ++round) {
      std::set<int> snapshot = present;
      for (int n : snapshot)
        for (size_t r = 0; r < rs.rules.size(); ++r) {
          if (!is_trigger(f, (int)r, n)) continue;
          if (f.child(n, (int)r, 1).has_value() &&
              present.count(*f.child(n, (int)r, 1)))
            continue;
          m.triggers.push_back(Trigger{(int)r, n});
          for (int i = 1; i <= rs.rules[r].head_size(); ++i)
            present.insert(f.ensure_child(n, (int)r, i));
        }
    }
    Derivation r = restrict_derivation(f, m);
    CHECK(validate_derivation(f, r, DerivationKind::Restricted, 10).ok);
    CHECK(check_mixed(f, m, r));
    CHECK(r.triggers.size() <= m.triggers.size());
  }
}

TEST_CASE("active_unblocked ordering and fixpoint") {
  RuleSet rs = split_rules();
  Forest f = make_forest(parse_instance("R(a,b,b)"), rs);
  std::set<int> present{0};
  auto pending = active_unblocked(f, present);
  REQUIRE(pending.size() == 2);
  CHECK(pending[0].node <= pending[1].node);
  CHECK(pending[0] == Trigger{0, 0});
  CHECK(pending[1] == Trigger{1, 0});

  for (Trigger t : pending)
    for (int i = 1; i <= rs.rules[t.rule].head_size(); ++i)
      present.insert(f.ensure_child(t.node, t.rule, i));
  CHECK(active_unblocked(f, present).empty());
}
