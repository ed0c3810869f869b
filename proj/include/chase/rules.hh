#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace chase {

// A term is a constant or a labeled null. Nulls carry full provenance:
// the existential variable, the address the rule fired at, and the rule id.
// Two nulls are equal iff all three coincide.
struct Term {
  std::string name;   // constant name, or existential variable name for nulls
  std::string birth;  // address key; empty for constants
  std::string rule;   // rule id; empty for constants

  bool is_const() const { return birth.empty() && rule.empty(); }
  auto operator<=>(const Term&) const = default;
};

Term make_const(std::string name);
Term make_null(std::string var, std::string birth_key, std::string rule_id);

struct Atom {
  std::string pred;
  std::vector<Term> args;

  auto operator<=>(const Atom&) const = default;
};

std::string to_string(const Term& t);
std::string to_string(const Atom& a);

// Atom pattern over variables (rule bodies and heads contain no constants).
struct AtomPattern {
  std::string pred;
  std::vector<std::string> vars;
};

struct Rule {
  std::string id;
  AtomPattern body;                    // exactly one atom: linearity
  std::vector<AtomPattern> head;       // nonempty
  std::vector<std::string> exist_vars; // head vars not in body, first-occurrence order
  std::set<std::string> frontier;      // body vars that occur in the head

  int head_size() const { return (int)head.size(); }
};

struct RuleSet {
  std::vector<Rule> rules;
  std::map<std::string, int> arity; // signature: predicate -> arity
  int max_arity = 0;

  const Rule* find(const std::string& id) const;
  int index_of(const std::string& id) const; // -1 if absent
};

struct Instance {
  std::vector<Atom> facts; // ground, constants only, duplicate-free, input order
};

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int line, int col, const std::string& msg);
};
struct NonLinearBody : std::runtime_error {
  std::string rule_id;
  explicit NonLinearBody(const std::string& id);
};
struct ArityMismatch : std::runtime_error {
  explicit ArityMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

// Rule-file grammar, one rule per statement, % starts a line comment:
//   rule <id> : <Pred>(<vars>) -> [exists <v1> [<v2>...] .] <Pred>(<vars>) [, <Pred>(<vars>)]* .
// All identifiers inside atoms are variables.
RuleSet parse_ruleset(const std::string& text);

// Instance files: one fact per line, <Pred>(<constants>). All identifiers are constants.
// When rs is given, predicates must fit its signature.
Instance parse_instance(const std::string& text, const RuleSet* rs = nullptr);

std::string print_ruleset(const RuleSet& rs);

// Head-atom index (1-based) -> set of positions (1-based) carrying frontier variables.
std::map<int, std::set<int>> frontier_positions(const Rule& r);

// One canonical ground atom per isomorphism class: for each predicate of arity k,
// one atom per partition of {1..k}, constants c1..ck by first occurrence.
std::vector<Atom> enumerate_critical_atoms(const RuleSet& rs);

// Parses a ground atom "R(c1,c2)" (identifiers are constants).
Atom parse_ground_atom(const std::string& text);

} // namespace chase
