#include "chase/rules.hh"

#include <algorithm>
#include <sstream>

namespace chase {

Term make_const(std::string name) { return Term{std::move(name), "", ""}; }
Term make_null(std::string var, std::string birth_key, std::string rule_id) {
  return Term{std::move(var), std::move(birth_key), std::move(rule_id)};
}

std::string to_string(const Term& t) {
  if (t.is_const()) return t.name;
  return t.name + "^" + t.rule + "@" + t.birth;
}

std::string to_string(const Atom& a) {
  std::string s = a.pred + "(";
  for (size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ",";
    s += to_string(a.args[i]);
  }
  return s + ")";
}

const Rule* RuleSet::find(const std::string& id) const {
  for (const auto& r : rules)
    if (r.id == id) return &r;
  return nullptr;
}

int RuleSet::index_of(const std::string& id) const {
  for (size_t i = 0; i < rules.size(); ++i)
    if (rules[i].id == id) return (int)i;
  return -1;
}

ParseError::ParseError(int line, int col, const std::string& msg)
    : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                         std::to_string(col) + ": " + msg),
      line(line), col(col) {}

NonLinearBody::NonLinearBody(const std::string& id)
    : std::runtime_error("rule " + id + ": body must be a single atom"),
      rule_id(id) {}

namespace {

struct Token {
  enum Kind { Ident, Punct, End } kind;
  std::string text;
  int line, col;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  void advance() {
    if (pos < src.size() && src[pos] == '\n') { line++; col = 1; }
    else col++;
    pos++;
  }

  void skip_ws() {
    while (pos < src.size()) {
      char c = src[pos];
      if (c == '%') {
        while (pos < src.size() && src[pos] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  Token next() {
    skip_ws();
    if (pos >= src.size()) return {Token::End, "", line, col};
    int l = line, c = col;
    char ch = src[pos];
    if (isalnum((unsigned char)ch) || ch == '_') {
      std::string t;
      while (pos < src.size() &&
             (isalnum((unsigned char)src[pos]) || src[pos] == '_')) {
        t += src[pos];
        advance();
      }
      return {Token::Ident, t, l, c};
    }
    if (pos + 1 < src.size() && ch == '-' && src[pos + 1] == '>') {
      advance(); advance();
      return {Token::Punct, "->", l, c};
    }
    std::string t(1, ch);
    advance();
    return {Token::Punct, t, l, c};
  }
};

struct Parser {
  Lexer lex;
  Token cur;

  explicit Parser(const std::string& s) : lex(s) { cur = lex.next(); }

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(cur.line, cur.col, msg);
  }
  void expect_punct(const std::string& p) {
    if (cur.kind != Token::Punct || cur.text != p)
      fail("expected '" + p + "'");
    cur = lex.next();
  }
  std::string expect_ident(const std::string& what) {
    if (cur.kind != Token::Ident) fail("expected " + what);
    std::string t = cur.text;
    cur = lex.next();
    return t;
  }
  bool at_punct(const std::string& p) const {
    return cur.kind == Token::Punct && cur.text == p;
  }
  bool at_ident(const std::string& kw) const {
    return cur.kind == Token::Ident && cur.text == kw;
  }

  AtomPattern atom_pattern() {
    AtomPattern a;
    a.pred = expect_ident("predicate");
    expect_punct("(");
    a.vars.push_back(expect_ident("variable"));
    while (at_punct(",")) {
      cur = lex.next();
      a.vars.push_back(expect_ident("variable"));
    }
    expect_punct(")");
    return a;
  }
};

void note_arity(RuleSet& rs, const std::string& pred, int k,
                const std::string& where) {
  auto it = rs.arity.find(pred);
  if (it == rs.arity.end()) {
    rs.arity[pred] = k;
    rs.max_arity = std::max(rs.max_arity, k);
  } else if (it->second != k) {
    throw ArityMismatch("predicate " + pred + " used with arity " +
                        std::to_string(k) + " in " + where +
                        " but declared with arity " +
                        std::to_string(it->second));
  }
}

} // namespace

RuleSet parse_ruleset(const std::string& text) {
  RuleSet rs;
  Parser p(text);
  std::set<std::string> seen_ids;
  while (p.cur.kind != Token::End) {
    if (!p.at_ident("rule")) p.fail("expected 'rule'");
    p.cur = p.lex.next();
    Rule r;
    r.id = p.expect_ident("rule id");
    if (!seen_ids.insert(r.id).second)
      throw ParseError(p.cur.line, p.cur.col, "duplicate rule id " + r.id);
    p.expect_punct(":");
    r.body = p.atom_pattern();
    if (p.at_punct(",")) throw NonLinearBody(r.id);
    p.expect_punct("->");
    std::vector<std::string> declared_exists;
    if (p.at_ident("exists")) {
      p.cur = p.lex.next();
      declared_exists.push_back(p.expect_ident("existential variable"));
      while (p.cur.kind == Token::Ident && !p.at_ident("exists"))
        declared_exists.push_back(p.expect_ident("existential variable"));
      p.expect_punct(".");
    }
    r.head.push_back(p.atom_pattern());
    while (p.at_punct(",")) {
      p.cur = p.lex.next();
      r.head.push_back(p.atom_pattern());
    }
    p.expect_punct(".");

    std::set<std::string> body_vars(r.body.vars.begin(), r.body.vars.end());
    std::set<std::string> declared(declared_exists.begin(),
                                   declared_exists.end());
    for (const auto& v : declared_exists)
      if (body_vars.count(v))
        throw ParseError(p.cur.line, p.cur.col,
                         "existential variable " + v + " occurs in the body of " + r.id);
    std::set<std::string> seen_head;
    for (const auto& h : r.head)
      for (const auto& v : h.vars) {
        if (body_vars.count(v)) {
          r.frontier.insert(v);
        } else {
          if (!declared.count(v))
            throw ParseError(p.cur.line, p.cur.col,
                             "head variable " + v + " of rule " + r.id +
                                 " is neither frontier nor declared existential");
          if (seen_head.insert(v).second) r.exist_vars.push_back(v);
        }
      }

    note_arity(rs, r.body.pred, (int)r.body.vars.size(), "body of " + r.id);
    for (const auto& h : r.head)
      note_arity(rs, h.pred, (int)h.vars.size(), "head of " + r.id);
    rs.rules.push_back(std::move(r));
  }
  return rs;
}

Instance parse_instance(const std::string& text, const RuleSet* rs) {
  Instance inst;
  Parser p(text);
  std::set<Atom> seen;
  while (p.cur.kind != Token::End) {
    Atom a;
    a.pred = p.expect_ident("predicate");
    p.expect_punct("(");
    a.args.push_back(make_const(p.expect_ident("constant")));
    while (p.at_punct(",")) {
      p.cur = p.lex.next();
      a.args.push_back(make_const(p.expect_ident("constant")));
    }
    p.expect_punct(")");
    if (rs) {
      auto it = rs->arity.find(a.pred);
      if (it != rs->arity.end() && it->second != (int)a.args.size())
        throw ArityMismatch("fact " + to_string(a) + " has arity " +
                            std::to_string(a.args.size()) + ", signature says " +
                            std::to_string(it->second));
    }
    if (seen.insert(a).second) inst.facts.push_back(std::move(a));
  }
  return inst;
}

Atom parse_ground_atom(const std::string& text) {
  Instance i = parse_instance(text);
  if (i.facts.size() != 1)
    throw ParseError(1, 1, "expected exactly one atom");
  return i.facts[0];
}

std::string print_ruleset(const RuleSet& rs) {
  std::ostringstream out;
  auto atom = [&](const AtomPattern& a) {
    out << a.pred << "(";
    for (size_t i = 0; i < a.vars.size(); ++i) {
      if (i) out << ",";
      out << a.vars[i];
    }
    out << ")";
  };
  for (const auto& r : rs.rules) {
    out << "rule " << r.id << " : ";
    atom(r.body);
    out << " -> ";
    if (!r.exist_vars.empty()) {
      out << "exists";
      for (const auto& v : r.exist_vars) out << " " << v;
      out << " . ";
    }
    for (size_t i = 0; i < r.head.size(); ++i) {
      if (i) out << ", ";
      atom(r.head[i]);
    }
    out << " .\n";
  }
  return out.str();
}

std::map<int, std::set<int>> frontier_positions(const Rule& r) {
  std::map<int, std::set<int>> res;
  for (size_t i = 0; i < r.head.size(); ++i) {
    auto& s = res[(int)i + 1];
    for (size_t j = 0; j < r.head[i].vars.size(); ++j)
      if (r.frontier.count(r.head[i].vars[j])) s.insert((int)j + 1);
  }
  return res;
}

std::vector<Atom> enumerate_critical_atoms(const RuleSet& rs) {
  std::vector<Atom> out;
  for (const auto& [pred, k] : rs.arity) {
    // Enumerate partitions of positions 1..k via restricted growth strings:
    // block[j] <= 1 + max(block[0..j-1]). The block number of a position is
    // directly the canonical constant index (first-occurrence order).
    std::vector<int> block(k, 0);
    auto emit = [&]() {
      Atom a;
      a.pred = pred;
      for (int j = 0; j < k; ++j)
        a.args.push_back(make_const("c" + std::to_string(block[j] + 1)));
      out.push_back(std::move(a));
    };
    auto rec = [&](auto&& self, int j, int mx) -> void {
      if (j == k) { emit(); return; }
      for (int b = 0; b <= mx + 1 && b <= j; ++b) {
        block[j] = b;
        self(self, j + 1, std::max(mx, b));
      }
    };
    if (k == 0) continue;
    rec(rec, 0, -1);
  }
  return out;
}

} // namespace chase
