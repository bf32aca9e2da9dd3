#include "issy/hoa.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace issy::hoa {

bool eval_label(const Label& l, uint32_t valuation) {
  switch (l.kind) {
    case Label::Kind::True: return true;
    case Label::Kind::False: return false;
    case Label::Kind::Ap: return (valuation >> l.ap) & 1;
    case Label::Kind::Not: return !eval_label(l.kids[0], valuation);
    case Label::Kind::And:
      for (const auto& k : l.kids)
        if (!eval_label(k, valuation)) return false;
      return true;
    case Label::Kind::Or:
      for (const auto& k : l.kids)
        if (eval_label(k, valuation)) return true;
      return false;
  }
  return false;
}

uint64_t Automaton::game_color(const Edge& e) const {
  switch (acceptance) {
    case AccKind::All:
      return 1;
    case AccKind::Buchi:
      for (size_t c : e.colors)
        if (c == 0) return 1;
      return 0;
    case AccKind::ParityMaxOdd: {
      uint64_t m = 0;
      for (size_t c : e.colors) m = std::max<uint64_t>(m, c);
      return e.colors.empty() ? 0 : m;
    }
    case AccKind::ParityMaxEven: {
      // Shift by +1 into the max-odd convention (D15).
      uint64_t m = 0;
      for (size_t c : e.colors) m = std::max<uint64_t>(m, c + 1);
      return e.colors.empty() ? 0 : m;
    }
  }
  return 0;
}

namespace {

struct Tokenizer {
  const std::string& s;
  size_t pos = 0;

  void skip_ws() {
    for (;;) {
      while (pos < s.size() && isspace(static_cast<unsigned char>(s[pos])))
        ++pos;
      if (pos < s.size() && s[pos] == '/' && pos + 1 < s.size() &&
          s[pos + 1] == '*') {
        size_t end = s.find("*/", pos + 2);
        if (end == std::string::npos) throw HoaError("unterminated comment");
        pos = end + 2;
        continue;
      }
      break;
    }
  }

  bool eof() {
    skip_ws();
    return pos >= s.size();
  }

  std::string peek() {
    size_t save = pos;
    std::string t = next();
    pos = save;
    return t;
  }

  std::string next() {
    skip_ws();
    if (pos >= s.size()) return "";
    char c = s[pos];
    if (c == '"') {
      size_t end = s.find('"', pos + 1);
      if (end == std::string::npos) throw HoaError("unterminated string");
      std::string t = s.substr(pos, end - pos + 1);
      pos = end + 1;
      return t;
    }
    if (std::string("[]{}()&|!").find(c) != std::string::npos) {
      ++pos;
      return std::string(1, c);
    }
    size_t b = pos;
    while (pos < s.size() && !isspace(static_cast<unsigned char>(s[pos])) &&
           std::string("[]{}()&|!\"").find(s[pos]) == std::string::npos)
      ++pos;
    return s.substr(b, pos - b);
  }
};

// label ::= or ; or ::= and ('|' and)* ; and ::= unary ('&' unary)* ;
// unary ::= '!' unary | 't' | 'f' | <int> | '(' or ')'
struct LabelParser {
  Tokenizer& tz;

  Label parse() { return parse_or(); }

  Label parse_or() {
    Label a = parse_and();
    while (tz.peek() == "|") {
      tz.next();
      Label b = parse_and();
      Label o;
      o.kind = Label::Kind::Or;
      o.kids = {std::move(a), std::move(b)};
      a = std::move(o);
    }
    return a;
  }

  Label parse_and() {
    Label a = parse_unary();
    while (tz.peek() == "&") {
      tz.next();
      Label b = parse_unary();
      Label o;
      o.kind = Label::Kind::And;
      o.kids = {std::move(a), std::move(b)};
      a = std::move(o);
    }
    return a;
  }

  Label parse_unary() {
    std::string t = tz.next();
    if (t == "!") {
      Label n;
      n.kind = Label::Kind::Not;
      n.kids = {parse_unary()};
      return n;
    }
    if (t == "t") return Label::t();
    if (t == "f") return Label::f();
    if (t == "(") {
      Label inner = parse_or();
      if (tz.next() != ")") throw HoaError("expected ')' in label");
      return inner;
    }
    if (!t.empty() && isdigit(static_cast<unsigned char>(t[0]))) {
      Label l;
      l.kind = Label::Kind::Ap;
      l.ap = std::stoul(t);
      return l;
    }
    throw HoaError("bad label token '" + t + "'");
  }
};

std::vector<size_t> parse_acc_sets(Tokenizer& tz) {
  // caller consumed '{'
  std::vector<size_t> out;
  for (;;) {
    std::string t = tz.next();
    if (t == "}") return out;
    if (t.empty()) throw HoaError("unterminated acceptance set list");
    out.push_back(std::stoul(t));
  }
}

}  // namespace

Automaton parse_hoa(const std::string& text) {
  Tokenizer tz{text};
  Automaton a;
  bool have_states = false, have_start = false, state_based_hint = false;
  std::string acc_name, acc_formula;
  size_t acc_count = 0;
  bool have_acc_name = false, have_acceptance = false;

  std::string t = tz.next();
  if (t != "HOA:") throw HoaError("missing HOA: header");
  if (tz.next() != "v1") throw HoaError("only HOA v1 supported");

  // headers
  for (;;) {
    t = tz.next();
    if (t.empty()) throw HoaError("missing --BODY--");
    if (t == "--BODY--") break;
    if (t == "States:") {
      a.num_states = std::stoul(tz.next());
      have_states = true;
    } else if (t == "Start:") {
      if (have_start) throw NondeterministicAutomaton("multiple Start:");
      std::string s0 = tz.next();
      if (tz.peek() == "&")
        throw NondeterministicAutomaton("universal initial states");
      a.initial = std::stoul(s0);
      have_start = true;
    } else if (t == "AP:") {
      a.ap_count = std::stoul(tz.next());
      for (size_t i = 0; i < a.ap_count; ++i) {
        std::string name = tz.next();
        if (name.size() >= 2 && name.front() == '"' && name.back() == '"')
          name = name.substr(1, name.size() - 2);
        a.ap_names.push_back(name);
      }
    } else if (t == "acc-name:") {
      acc_name = tz.next();
      have_acc_name = true;
      // consume the header's remaining value tokens
      for (;;) {
        std::string p = tz.peek();
        if (p.empty() || p == "--BODY--" ||
            (p.size() > 1 && p.back() == ':'))
          break;
        acc_name += " " + tz.next();
      }
    } else if (t == "Acceptance:") {
      acc_count = std::stoul(tz.next());
      have_acceptance = true;
      // consume the acceptance formula tokens up to end-of-line semantics:
      // read until a token that looks like a header (ends with ':') or
      // --BODY--; tokenizer has no line structure, so peek carefully.
      for (;;) {
        std::string p = tz.peek();
        if (p.empty() || p == "--BODY--" ||
            (p.size() > 1 && p.back() == ':'))
          break;
        acc_formula += tz.next() + " ";
      }
    } else if (t == "properties:" || t == "name:" || t == "tool:") {
      for (;;) {
        std::string p = tz.peek();
        if (p.empty() || p == "--BODY--" ||
            (p.size() > 1 && p.back() == ':'))
          break;
        std::string v = tz.next();
        if (t == "properties:" && v == "state-acc") state_based_hint = true;
      }
    } else if (t.size() > 1 && t.back() == ':') {
      // unknown header: skip its values
      for (;;) {
        std::string p = tz.peek();
        if (p.empty() || p == "--BODY--" ||
            (p.size() > 1 && p.back() == ':'))
          break;
        tz.next();
      }
    } else {
      throw HoaError("unexpected header token '" + t + "'");
    }
  }
  (void)state_based_hint;

  if (!have_states) throw HoaError("States: required");
  if (!have_start) throw HoaError("Start: required");

  // acceptance classification
  if (have_acc_name) {
    std::istringstream as(acc_name);
    std::string kind;
    as >> kind;
    if (kind == "Buchi") {
      a.acceptance = AccKind::Buchi;
      a.acc_sets = 1;
    } else if (kind == "all") {
      a.acceptance = AccKind::All;
      a.acc_sets = 0;
    } else if (kind == "parity") {
      std::string mm, eo;
      size_t n;
      as >> mm >> eo >> n;
      if (mm != "max") throw UnsupportedAcceptance(acc_name);
      if (eo == "odd")
        a.acceptance = AccKind::ParityMaxOdd;
      else if (eo == "even")
        a.acceptance = AccKind::ParityMaxEven;
      else
        throw UnsupportedAcceptance(acc_name);
      a.acc_sets = n;
    } else {
      throw UnsupportedAcceptance(acc_name);
    }
  } else if (have_acceptance) {
    // recognize the two trivial shapes without an acc-name
    std::string f = acc_formula;
    f.erase(std::remove(f.begin(), f.end(), ' '), f.end());
    if (acc_count == 0 && f == "t") {
      a.acceptance = AccKind::All;
      a.acc_sets = 0;
    } else if (acc_count == 1 && f == "Inf(0)") {
      a.acceptance = AccKind::Buchi;
      a.acc_sets = 1;
    } else {
      throw UnsupportedAcceptance("Acceptance: " + acc_formula);
    }
  } else {
    throw HoaError("Acceptance: required");
  }

  a.edges.assign(a.num_states, {});

  // body
  std::optional<size_t> cur;
  std::vector<size_t> cur_state_colors;
  for (;;) {
    t = tz.next();
    if (t == "--END--") break;
    if (t.empty()) throw HoaError("missing --END--");
    if (t == "State:") {
      cur_state_colors.clear();
      std::string nx = tz.next();
      if (nx == "[") throw HoaError("state labels not supported");
      size_t id = std::stoul(nx);
      if (id >= a.num_states) throw HoaError("state id out of range");
      cur = id;
      // optional name / acc sets
      for (;;) {
        std::string p = tz.peek();
        if (p.size() >= 1 && p[0] == '"') {
          tz.next();
          continue;
        }
        if (p == "{") {
          tz.next();
          cur_state_colors = parse_acc_sets(tz);
          continue;
        }
        break;
      }
      continue;
    }
    if (t == "[") {
      if (!cur) throw HoaError("edge before State:");
      LabelParser lp{tz};
      Automaton::Edge e;
      e.label = lp.parse();
      if (tz.next() != "]") throw HoaError("expected ']'");
      std::string dst = tz.next();
      if (tz.peek() == "&")
        throw NondeterministicAutomaton("universal branching");
      e.target = std::stoul(dst);
      if (e.target >= a.num_states) throw HoaError("target out of range");
      e.colors = cur_state_colors;  // state-based acceptance, if any
      if (tz.peek() == "{") {
        tz.next();
        auto cs = parse_acc_sets(tz);
        e.colors.insert(e.colors.end(), cs.begin(), cs.end());
      }
      a.edges[*cur].push_back(std::move(e));
      continue;
    }
    throw HoaError("unexpected body token '" + t + "'");
  }

  if (a.initial >= a.num_states) throw HoaError("initial state out of range");
  check_deterministic_complete(a);
  return a;
}

void check_deterministic_complete(const Automaton& a) {
  if (a.ap_count > 20) throw HoaError("too many atomic propositions");
  uint32_t limit = 1u << a.ap_count;
  for (size_t s = 0; s < a.num_states; ++s) {
    for (uint32_t v = 0; v < limit; ++v) {
      int hits = 0;
      for (const auto& e : a.edges[s])
        if (eval_label(e.label, v)) ++hits;
      if (hits == 0)
        throw NondeterministicAutomaton(
            "state " + std::to_string(s) + " incomplete");
      if (hits > 1)
        throw NondeterministicAutomaton(
            "state " + std::to_string(s) + " has overlapping labels");
    }
  }
}

}  // namespace issy::hoa
