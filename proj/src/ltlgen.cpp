#include "issy/ltlgen.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace issy::ltlgen {

namespace {

using Op = PForm::Op;

PFormPtr mk(Op op, std::vector<PFormPtr> kids = {}) {
  auto f = std::make_shared<PForm>();
  f->op = op;
  f->kids = std::move(kids);
  return f;
}

PFormPtr mk_ap(size_t i) {
  auto f = std::make_shared<PForm>();
  f->op = Op::Ap;
  f->ap = i;
  return f;
}

PFormPtr tru() { return mk(Op::True); }
PFormPtr fls() { return mk(Op::False); }

// --- parser: fully parenthesized or precedence-based, Spot-compatible ops ----

struct PParser {
  const std::string& s;
  size_t pos = 0;

  void ws() {
    while (pos < s.size() && isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  }
  bool eat(const char* tok) {
    ws();
    size_t n = strlen(tok);
    if (s.compare(pos, n, tok) == 0) {
      pos += n;
      return true;
    }
    return false;
  }
  char peek() {
    ws();
    return pos < s.size() ? s[pos] : 0;
  }

  PFormPtr parse() {
    PFormPtr f = parse_iff();
    ws();
    if (pos != s.size()) throw PltlParseError("trailing input");
    return f;
  }

  PFormPtr parse_iff() {
    PFormPtr a = parse_imp();
    if (eat("<->")) return mk(Op::Iff, {a, parse_iff()});
    return a;
  }
  PFormPtr parse_imp() {
    PFormPtr a = parse_or();
    if (eat("->")) return mk(Op::Implies, {a, parse_imp()});
    return a;
  }
  PFormPtr parse_or() {
    PFormPtr a = parse_and();
    for (;;) {
      ws();
      if (eat("||") || (peek() == '|' && ++pos)) {
        a = mk(Op::Or, {a, parse_and()});
      } else {
        return a;
      }
    }
  }
  PFormPtr parse_and() {
    PFormPtr a = parse_until();
    for (;;) {
      ws();
      if (eat("&&") || (peek() == '&' && ++pos)) {
        a = mk(Op::And, {a, parse_until()});
      } else {
        return a;
      }
    }
  }
  bool at_word(char c) {
    // temporal operator letters must not swallow identifiers like p1
    ws();
    if (pos >= s.size() || s[pos] != c) return false;
    size_t n = pos + 1;
    if (n < s.size() &&
        (isalnum(static_cast<unsigned char>(s[n])) || s[n] == '_'))
      return false;
    return true;
  }
  PFormPtr parse_until() {
    PFormPtr a = parse_unary();
    ws();
    if (at_word('U')) {
      ++pos;
      return mk(Op::Until, {a, parse_until()});
    }
    if (at_word('W')) {
      ++pos;
      return mk(Op::WeakUntil, {a, parse_until()});
    }
    if (at_word('R')) {
      ++pos;
      return mk(Op::Release, {a, parse_until()});
    }
    return a;
  }
  PFormPtr parse_unary() {
    ws();
    if (eat("!")) return mk(Op::Not, {parse_unary()});
    if (at_word('X')) {
      ++pos;
      return mk(Op::Next, {parse_unary()});
    }
    if (at_word('F')) {
      ++pos;
      return mk(Op::Eventually, {parse_unary()});
    }
    if (at_word('G')) {
      ++pos;
      return mk(Op::Globally, {parse_unary()});
    }
    return parse_atom();
  }
  PFormPtr parse_atom() {
    ws();
    if (eat("(")) {
      PFormPtr f = parse_iff();
      if (!eat(")")) throw PltlParseError("expected ')'");
      return f;
    }
    if (pos < s.size() && (s[pos] == '1' || s[pos] == '0')) {
      char c = s[pos];
      size_t n = pos + 1;
      if (n >= s.size() || !isalnum(static_cast<unsigned char>(s[n]))) {
        ++pos;
        return c == '1' ? tru() : fls();
      }
    }
    if (eat("true")) return tru();
    if (eat("false")) return fls();
    if (pos < s.size() && s[pos] == 'p') {
      size_t n = pos + 1;
      size_t b = n;
      while (n < s.size() && isdigit(static_cast<unsigned char>(s[n]))) ++n;
      if (n > b) {
        size_t i = std::stoul(s.substr(b, n - b));
        pos = n;
        return mk_ap(i);
      }
    }
    throw PltlParseError("expected an atom at offset " + std::to_string(pos));
  }
};

// --- NNF ----------------------------------------------------------------------

PFormPtr nnf(const PFormPtr& f, bool pos) {
  switch (f->op) {
    case Op::True: return pos ? tru() : fls();
    case Op::False: return pos ? fls() : tru();
    case Op::Ap: return pos ? f : mk(Op::Not, {f});
    case Op::Not: return nnf(f->kids[0], !pos);
    case Op::And:
    case Op::Or: {
      bool conj = (f->op == Op::And) == pos;
      std::vector<PFormPtr> ks;
      for (const auto& k : f->kids) ks.push_back(nnf(k, pos));
      return mk(conj ? Op::And : Op::Or, std::move(ks));
    }
    case Op::Implies:
      return pos ? mk(Op::Or, {nnf(f->kids[0], false), nnf(f->kids[1], true)})
                 : mk(Op::And,
                      {nnf(f->kids[0], true), nnf(f->kids[1], false)});
    case Op::Iff: {
      PFormPtr both = mk(Op::And, {nnf(f->kids[0], true), nnf(f->kids[1], true)});
      PFormPtr neither =
          mk(Op::And, {nnf(f->kids[0], false), nnf(f->kids[1], false)});
      PFormPtr same = mk(Op::Or, {both, neither});
      if (pos) return same;
      return mk(Op::Or,
                {mk(Op::And, {nnf(f->kids[0], true), nnf(f->kids[1], false)}),
                 mk(Op::And, {nnf(f->kids[0], false), nnf(f->kids[1], true)})});
    }
    case Op::Next: return mk(Op::Next, {nnf(f->kids[0], pos)});
    case Op::Eventually:
      return pos ? mk(Op::Eventually, {nnf(f->kids[0], true)})
                 : mk(Op::Globally, {nnf(f->kids[0], false)});
    case Op::Globally:
      return pos ? mk(Op::Globally, {nnf(f->kids[0], true)})
                 : mk(Op::Eventually, {nnf(f->kids[0], false)});
    case Op::Until:
      // !(a U b) == !a R !b
      return pos ? mk(Op::Until, {nnf(f->kids[0], true), nnf(f->kids[1], true)})
                 : mk(Op::Release,
                      {nnf(f->kids[0], false), nnf(f->kids[1], false)});
    case Op::Release:
      return pos ? mk(Op::Release,
                      {nnf(f->kids[0], true), nnf(f->kids[1], true)})
                 : mk(Op::Until,
                      {nnf(f->kids[0], false), nnf(f->kids[1], false)});
    case Op::WeakUntil: {
      // a W b == b R (a | b); negation goes through the rewrite
      PFormPtr rw = mk(Op::Release,
                       {f->kids[1], mk(Op::Or, {f->kids[0], f->kids[1]})});
      return nnf(rw, pos);
    }
  }
  return tru();
}

size_t max_ap(const PFormPtr& f) {
  size_t m = 0;
  if (f->op == Op::Ap) return f->ap + 1;
  for (const auto& k : f->kids) m = std::max(m, max_ap(k));
  return m;
}

bool is_propositional(const PFormPtr& f) {
  switch (f->op) {
    case Op::True:
    case Op::False:
    case Op::Ap:
      return true;
    case Op::Not:
    case Op::And:
    case Op::Or:
      for (const auto& k : f->kids)
        if (!is_propositional(k)) return false;
      return true;
    default:
      return false;
  }
}

bool eval_prop(const PFormPtr& f, uint32_t v) {
  switch (f->op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Ap: return (v >> f->ap) & 1;
    case Op::Not: return !eval_prop(f->kids[0], v);
    case Op::And:
      for (const auto& k : f->kids)
        if (!eval_prop(k, v)) return false;
      return true;
    case Op::Or:
      for (const auto& k : f->kids)
        if (eval_prop(k, v)) return true;
      return false;
    default:
      throw PltlParseError("eval_prop on temporal formula");
  }
}

// NNF classes
bool is_safety_nnf(const PFormPtr& f) {
  switch (f->op) {
    case Op::True:
    case Op::False:
    case Op::Ap:
      return true;
    case Op::Not:
      return f->kids[0]->op == Op::Ap;
    case Op::And:
    case Op::Or:
    case Op::Next:
    case Op::Globally:
    case Op::Release:
      for (const auto& k : f->kids)
        if (!is_safety_nnf(k)) return false;
      return true;
    default:
      return false;
  }
}

bool is_cosafety_nnf(const PFormPtr& f) {
  switch (f->op) {
    case Op::True:
    case Op::False:
    case Op::Ap:
      return true;
    case Op::Not:
      return f->kids[0]->op == Op::Ap;
    case Op::And:
    case Op::Or:
    case Op::Next:
    case Op::Eventually:
    case Op::Until:
      for (const auto& k : f->kids)
        if (!is_cosafety_nnf(k)) return false;
      return true;
    default:
      return false;
  }
}

// Boolean combination of GF(prop) / FG(prop).
bool is_inf_combo(const PFormPtr& f) {
  switch (f->op) {
    case Op::True:
    case Op::False:
      return true;
    case Op::And:
    case Op::Or:
      for (const auto& k : f->kids)
        if (!is_inf_combo(k)) return false;
      return true;
    case Op::Globally:
      return f->kids[0]->op == Op::Eventually &&
             is_propositional(f->kids[0]->kids[0]);
    case Op::Eventually:
      return f->kids[0]->op == Op::Globally &&
             is_propositional(f->kids[0]->kids[0]);
    default:
      return false;
  }
}

// --- progression automata (safety / co-safety) -----------------------------------

// Canonical string key for a progressed formula; progression results are
// built from And/Or over a finite closure, normalized enough to dedupe.
std::string form_key(const PFormPtr& f) {
  std::ostringstream os;
  std::function<void(const PFormPtr&)> walk = [&](const PFormPtr& g) {
    switch (g->op) {
      case Op::True: os << "T"; return;
      case Op::False: os << "F"; return;
      case Op::Ap: os << "p" << g->ap; return;
      default: break;
    }
    os << "(" << static_cast<int>(g->op);
    for (const auto& k : g->kids) {
      os << " ";
      walk(k);
    }
    os << ")";
  };
  walk(f);
  return os.str();
}

PFormPtr simp_and(std::vector<PFormPtr> ks) {
  std::vector<PFormPtr> out;
  std::set<std::string> seen;
  for (auto& k : ks) {
    if (k->op == Op::False) return fls();
    if (k->op == Op::True) continue;
    if (k->op == Op::And) {
      for (const auto& inner : k->kids) {
        if (inner->op == Op::False) return fls();
        if (seen.insert(form_key(inner)).second) out.push_back(inner);
      }
      continue;
    }
    if (seen.insert(form_key(k)).second) out.push_back(k);
  }
  if (out.empty()) return tru();
  if (out.size() == 1) return out[0];
  std::sort(out.begin(), out.end(), [](const PFormPtr& a, const PFormPtr& b) {
    return form_key(a) < form_key(b);
  });
  return mk(Op::And, std::move(out));
}

PFormPtr simp_or(std::vector<PFormPtr> ks) {
  std::vector<PFormPtr> out;
  std::set<std::string> seen;
  for (auto& k : ks) {
    if (k->op == Op::True) return tru();
    if (k->op == Op::False) continue;
    if (k->op == Op::Or) {
      for (const auto& inner : k->kids) {
        if (inner->op == Op::True) return tru();
        if (seen.insert(form_key(inner)).second) out.push_back(inner);
      }
      continue;
    }
    if (seen.insert(form_key(k)).second) out.push_back(k);
  }
  if (out.empty()) return fls();
  if (out.size() == 1) return out[0];
  std::sort(out.begin(), out.end(), [](const PFormPtr& a, const PFormPtr& b) {
    return form_key(a) < form_key(b);
  });
  return mk(Op::Or, std::move(out));
}

// One-step progression of an NNF safety/co-safety formula through letter v.
PFormPtr progress(const PFormPtr& f, uint32_t v) {
  switch (f->op) {
    case Op::True: return tru();
    case Op::False: return fls();
    case Op::Ap: return ((v >> f->ap) & 1) ? tru() : fls();
    case Op::Not:
      return ((v >> f->kids[0]->ap) & 1) ? fls() : tru();
    case Op::And: {
      std::vector<PFormPtr> ks;
      for (const auto& k : f->kids) ks.push_back(progress(k, v));
      return simp_and(std::move(ks));
    }
    case Op::Or: {
      std::vector<PFormPtr> ks;
      for (const auto& k : f->kids) ks.push_back(progress(k, v));
      return simp_or(std::move(ks));
    }
    case Op::Next:
      return f->kids[0];
    case Op::Globally:
      return simp_and({progress(f->kids[0], v), f});
    case Op::Eventually:
      return simp_or({progress(f->kids[0], v), f});
    case Op::Until:
      return simp_or(
          {progress(f->kids[1], v),
           simp_and({progress(f->kids[0], v), f})});
    case Op::Release:
      return simp_and(
          {progress(f->kids[1], v),
           simp_or({progress(f->kids[0], v), f})});
    case Op::WeakUntil:
      return simp_or(
          {progress(f->kids[1], v),
           simp_and({progress(f->kids[0], v), f})});
    default:
      return tru();
  }
}

constexpr size_t kMaxStates = 4000;
constexpr size_t kMaxAp = 10;
constexpr size_t kMaxMarks = 5;
constexpr size_t kMaxClauses = 512;

// Canonical minimal DNF over temporal atoms (the non-boolean nodes of the
// progression closure). Progression composes And/Or ever deeper; without a
// canonical form the state set never closes.
PFormPtr canonical_dnf(const PFormPtr& f, bool* overflow) {
  using Clause = std::set<std::string>;
  std::map<std::string, PFormPtr> atoms;
  bool over = false;

  std::function<std::set<Clause>(const PFormPtr&)> dnf =
      [&](const PFormPtr& g) -> std::set<Clause> {
    if (over) return {};
    switch (g->op) {
      case Op::True:
        return {Clause{}};
      case Op::False:
        return {};
      case Op::And: {
        std::set<Clause> acc = {Clause{}};
        for (const auto& k : g->kids) {
          std::set<Clause> kd = dnf(k);
          std::set<Clause> next;
          for (const auto& a : acc)
            for (const auto& b : kd) {
              Clause u = a;
              u.insert(b.begin(), b.end());
              next.insert(std::move(u));
              if (next.size() > kMaxClauses) {
                over = true;
                return {};
              }
            }
          acc = std::move(next);
        }
        return acc;
      }
      case Op::Or: {
        std::set<Clause> acc;
        for (const auto& k : g->kids) {
          std::set<Clause> kd = dnf(k);
          acc.insert(kd.begin(), kd.end());
          if (acc.size() > kMaxClauses) {
            over = true;
            return {};
          }
        }
        return acc;
      }
      default: {
        std::string key = form_key(g);
        atoms.emplace(key, g);
        return {Clause{key}};
      }
    }
  };

  std::set<Clause> clauses = dnf(f);
  if (over) {
    if (overflow) *overflow = true;
    return f;
  }
  // absorption: drop supersets of other clauses
  std::vector<Clause> kept;
  for (const auto& c : clauses) {
    bool subsumed = false;
    for (const auto& d : clauses) {
      if (&c == &d) continue;
      if (d.size() < c.size() ||
          (d.size() == c.size() && d < c)) {
        if (std::includes(c.begin(), c.end(), d.begin(), d.end())) {
          subsumed = true;
          break;
        }
      }
    }
    if (!subsumed) kept.push_back(c);
  }
  if (kept.empty()) return fls();
  std::vector<PFormPtr> or_kids;
  for (const auto& c : kept) {
    if (c.empty()) return tru();
    std::vector<PFormPtr> and_kids;
    for (const auto& key : c) and_kids.push_back(atoms.at(key));
    or_kids.push_back(and_kids.size() == 1 ? and_kids[0]
                                           : mk(Op::And, std::move(and_kids)));
  }
  if (or_kids.size() == 1) return or_kids[0];
  return mk(Op::Or, std::move(or_kids));
}

// Deterministic automaton by progression. For safety, FALSE is the rejecting
// sink (color 0), everything else colors 1; for co-safety, TRUE is the
// accepting sink (color 1), everything else 0.
std::optional<Dpa> progression_automaton(const PFormPtr& f, size_t ap_count,
                                         bool safety, std::string* why) {
  Dpa d;
  d.ap_count = ap_count;
  d.num_colors = 2;
  std::map<std::string, size_t> index;
  std::vector<PFormPtr> states;
  auto intern = [&](const PFormPtr& g) -> std::optional<size_t> {
    std::string key = form_key(g);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    if (states.size() >= kMaxStates) return std::nullopt;
    size_t id = states.size();
    index[key] = id;
    states.push_back(g);
    d.edges.push_back({});
    return id;
  };
  bool overflow = false;
  auto init = intern(canonical_dnf(f, &overflow));
  if (!init || overflow) {
    if (why) *why = "state cap exceeded";
    return std::nullopt;
  }
  d.initial = *init;
  uint32_t letters = 1u << ap_count;
  for (size_t s = 0; s < states.size(); ++s) {
    PFormPtr g = states[s];
    for (uint32_t v = 0; v < letters; ++v) {
      PFormPtr h = canonical_dnf(progress(g, v), &overflow);
      if (overflow) {
        if (why) *why = "clause cap exceeded";
        return std::nullopt;
      }
      auto t = intern(h);
      if (!t) {
        if (why) *why = "state cap exceeded";
        return std::nullopt;
      }
      size_t color;
      if (safety)
        color = h->op == Op::False ? 0 : 1;
      else
        color = h->op == Op::True ? 1 : 0;
      d.edges[s].push_back({v, *t, color});
    }
  }
  d.num_states = states.size();
  return d;
}

// --- GF/FG combinations via a latest-appearance record over marks ----------------

struct InfCombo {
  // marks b_0..b_{m-1}: propositional formulas tracked for "infinitely often"
  std::vector<PFormPtr> marks;
  // verdict(P) for P = set of marks that occur infinitely often
  PFormPtr verdict;  // over "mark atoms": Ap(i) = mark i infinitely often
};

// Rewrites an inf-combo formula into a verdict over mark indices.
PFormPtr combo_verdict(const PFormPtr& f, std::vector<PFormPtr>& marks) {
  switch (f->op) {
    case Op::True:
    case Op::False:
      return f;
    case Op::And:
    case Op::Or: {
      std::vector<PFormPtr> ks;
      for (const auto& k : f->kids) ks.push_back(combo_verdict(k, marks));
      return mk(f->op, std::move(ks));
    }
    case Op::Globally: {
      // G F beta: mark = beta
      PFormPtr beta = f->kids[0]->kids[0];
      marks.push_back(beta);
      return mk_ap(marks.size() - 1);
    }
    case Op::Eventually: {
      // F G gamma == ! G F !gamma: mark = !gamma
      PFormPtr gamma = f->kids[0]->kids[0];
      marks.push_back(mk(Op::Not, {gamma}));
      return mk(Op::Not, {mk_ap(marks.size() - 1)});
    }
    default:
      throw PltlParseError("not an inf combo");
  }
}

bool verdict_holds(const PFormPtr& verdict, const std::set<size_t>& inf) {
  switch (verdict->op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Ap: return inf.count(verdict->ap) != 0;
    case Op::Not: return !verdict_holds(verdict->kids[0], inf);
    case Op::And:
      for (const auto& k : verdict->kids)
        if (!verdict_holds(k, inf)) return false;
      return true;
    case Op::Or:
      for (const auto& k : verdict->kids)
        if (verdict_holds(k, inf)) return true;
      return false;
    default:
      return false;
  }
}

// Latest-appearance record over marks: the state is a permutation (most
// recently seen first). Reading a letter moves the letter's marks to the
// front (stably); the emitted color looks at the deepest disturbed position h
// and the satisfaction of the verdict on the new first h marks. The marks
// seen infinitely often collect at positions 1..|I|, position |I| is
// disturbed infinitely often, and deeper disturbances die out, so the
// maximal recurring color decides exactly by verdict(I).
std::optional<Dpa> lar_automaton(const InfCombo& combo, size_t ap_count,
                                 std::string* why) {
  size_t m = combo.marks.size();
  if (m > kMaxMarks) {
    if (why) *why = "too many GF/FG arguments";
    return std::nullopt;
  }
  Dpa d;
  d.ap_count = ap_count;
  d.num_colors = 2 * m + 3;

  std::map<std::vector<size_t>, size_t> index;
  std::vector<std::vector<size_t>> states;
  auto intern = [&](const std::vector<size_t>& perm) {
    auto it = index.find(perm);
    if (it != index.end()) return it->second;
    size_t id = states.size();
    index[perm] = id;
    states.push_back(perm);
    d.edges.push_back({});
    return id;
  };
  std::vector<size_t> init(m);
  for (size_t i = 0; i < m; ++i) init[i] = i;
  d.initial = intern(init);

  uint32_t letters = 1u << ap_count;
  for (size_t s = 0; s < states.size(); ++s) {
    std::vector<size_t> perm = states[s];
    for (uint32_t v = 0; v < letters; ++v) {
      std::set<size_t> hit;
      for (size_t i = 0; i < m; ++i)
        if (eval_prop(combo.marks[i], v)) hit.insert(i);
      // deepest old position among the hit marks (1-based); 0 if none
      size_t h = 0;
      for (size_t posn = 0; posn < m; ++posn)
        if (hit.count(perm[posn])) h = posn + 1;
      // stable move-to-front
      std::vector<size_t> next;
      for (size_t posn = 0; posn < m; ++posn)
        if (hit.count(perm[posn])) next.push_back(perm[posn]);
      for (size_t posn = 0; posn < m; ++posn)
        if (!hit.count(perm[posn])) next.push_back(perm[posn]);
      std::set<size_t> prefix(next.begin(), next.begin() + h);
      size_t color = verdict_holds(combo.verdict, prefix) ? 2 * h + 1
                                                          : 2 * h + 2;
      size_t t = intern(next);
      d.edges[s].push_back({v, t, color});
    }
  }
  d.num_states = states.size();
  return d;
}

// --- products ----------------------------------------------------------------------

// Generalized three-way product for a top-level conjunction or disjunction
// of a safety part S, a co-safety part C, and a prefix-independent GF/FG
// part I (each optional).
//
// Conjunction:  accept iff S never dies, C eventually accepts, I accepts.
//   colors: S dead -> absorbing even dominating; C pending -> 0 (neutral);
//           otherwise the I color (or 1 when I is absent).
// Disjunction:  accept iff S survives forever, or C accepts, or I accepts.
//   colors: C accepted -> absorbing odd dominating; S still alive -> odd
//           dominating (finitely often unless S lives forever);
//           otherwise the I color (or 0 when I is absent).
// I is prefix-independent, so deciding by its colors from any suffix is
// exact; the dominating colors of the S/C phases settle the other cases.
std::optional<Dpa> combine_parts(const std::optional<Dpa>& s_part,
                                 const std::optional<Dpa>& c_part,
                                 const std::optional<Dpa>& i_part,
                                 bool conjunction, size_t ap_count,
                                 std::string* why) {
  size_t icolors = i_part ? i_part->num_colors : 2;
  size_t dom_odd = icolors % 2 == 0 ? icolors + 1 : icolors;
  size_t dom_even = dom_odd + 1;

  Dpa d;
  d.ap_count = ap_count;
  d.num_colors = dom_even + 1;

  // component states; kSink marks "S dead" (conjunction) or "C accepted"
  // (disjunction), which absorbs
  const size_t kNone = static_cast<size_t>(-2);
  const size_t kSink = static_cast<size_t>(-1);
  struct Key {
    size_t s, c, i;
    bool operator<(const Key& o) const {
      return std::tie(s, c, i) < std::tie(o.s, o.c, o.i);
    }
  };
  std::map<Key, size_t> index;
  std::vector<Key> states;
  auto intern = [&](Key k) {
    auto it = index.find(k);
    if (it != index.end()) return it->second;
    size_t id = states.size();
    index[k] = id;
    states.push_back(k);
    d.edges.push_back({});
    return id;
  };

  Key init{s_part ? s_part->initial : kNone, c_part ? c_part->initial : kNone,
           i_part ? i_part->initial : kNone};
  d.initial = intern(init);

  uint32_t letters = 1u << ap_count;
  for (size_t s = 0; s < states.size(); ++s) {
    Key k = states[s];
    for (uint32_t v = 0; v < letters; ++v) {
      if (k.s == kSink) {  // absorbed
        d.edges[s].push_back({v, s, conjunction ? dom_even : dom_odd});
        continue;
      }  // note: intern() below may reallocate d.edges; never inline it
         // into an indexing expression
      Key next = k;
      bool s_died = false, c_accepted = false, c_pending = false;
      if (s_part && k.s != kNone) {
        const auto& e = s_part->edges[k.s][v];
        if (e.color == 0)
          s_died = true;
        else
          next.s = e.target;
      }
      if (c_part && k.c != kNone) {
        const auto& e = c_part->edges[k.c][v];
        if (e.color == 1) {
          c_accepted = true;
          next.c = kNone;  // obligation discharged
        } else {
          c_pending = true;
          next.c = e.target;
        }
      }
      size_t icolor = conjunction ? 1 : 0;
      if (i_part) {
        const auto& e = i_part->edges[k.i][v];
        icolor = e.color;
        next.i = e.target;
      }
      if (conjunction) {
        if (s_died) {
          Key sink{kSink, kSink, kSink};
          size_t tgt = intern(sink);
          d.edges[s].push_back({v, tgt, dom_even});
        } else if (c_pending) {
          size_t tgt = intern(next);
          d.edges[s].push_back({v, tgt, 0});
        } else {
          size_t tgt = intern(next);
          d.edges[s].push_back({v, tgt, icolor});
        }
      } else {
        if (c_accepted) {
          Key sink{kSink, kSink, kSink};
          size_t tgt = intern(sink);
          d.edges[s].push_back({v, tgt, dom_odd});
        } else if (s_part && k.s != kNone && !s_died) {
          size_t tgt = intern(next);
          d.edges[s].push_back({v, tgt, dom_odd});
        } else {
          if (s_died) next.s = kNone;  // S lost; stop tracking it
          size_t tgt = intern(next);
          d.edges[s].push_back({v, tgt, icolor});
        }
      }
    }
    if (states.size() > kMaxStates) {
      if (why) *why = "product cap exceeded";
      return std::nullopt;
    }
  }
  d.num_states = states.size();
  return d;
}

std::optional<Dpa> trivial_automaton(bool accept, size_t ap_count) {
  Dpa d;
  d.ap_count = ap_count;
  d.num_states = 1;
  d.initial = 0;
  d.num_colors = 2;
  d.edges.push_back({});
  for (uint32_t v = 0; v < (1u << ap_count); ++v)
    d.edges[0].push_back({v, 0, accept ? 1u : 0u});
  return d;
}

std::optional<Dpa> translate_nnf(const PFormPtr& f, size_t ap_count,
                                 std::string* why);

// Top-level conjunction/disjunction split into safety, co-safety, and GF/FG
// parts, combined by the generalized product.
std::optional<Dpa> translate_mixed(const PFormPtr& f, size_t ap_count,
                                   bool conjunction, std::string* why) {
  std::vector<PFormPtr> safetys, cosafetys, infs;
  std::vector<PFormPtr> todo = {f};
  Op split = conjunction ? Op::And : Op::Or;
  while (!todo.empty()) {
    PFormPtr g = todo.back();
    todo.pop_back();
    if (g->op == split) {
      for (const auto& k : g->kids) todo.push_back(k);
      continue;
    }
    if (is_inf_combo(g)) {
      infs.push_back(g);
    } else if (is_safety_nnf(g) && is_cosafety_nnf(g)) {
      // X-and-boolean only: file under whichever side keeps its automaton
      // exact for this connective
      (conjunction ? safetys : cosafetys).push_back(g);
    } else if (is_safety_nnf(g)) {
      safetys.push_back(g);
    } else if (is_cosafety_nnf(g)) {
      cosafetys.push_back(g);
    } else {
      if (why) *why = "subformula outside the supported fragment";
      return std::nullopt;
    }
  }
  // A conjunction of co-safety parts is co-safety (dually for safety), so
  // each class collapses into at most one automaton.
  std::optional<Dpa> s_part, c_part, i_part;
  std::string inner_why;
  if (!safetys.empty()) {
    // boolean combinations of safety formulas stay safety
    PFormPtr part = conjunction ? simp_and(safetys) : simp_or(safetys);
    s_part = progression_automaton(part, ap_count, /*safety=*/true, why);
    if (!s_part) return std::nullopt;
  }
  if (!cosafetys.empty()) {
    PFormPtr part = conjunction ? simp_and(cosafetys) : simp_or(cosafetys);
    c_part = progression_automaton(part, ap_count, /*safety=*/false, why);
    if (!c_part) return std::nullopt;
  }
  if (!infs.empty()) {
    PFormPtr part = conjunction ? simp_and(infs) : simp_or(infs);
    InfCombo combo;
    combo.verdict = combo_verdict(part, combo.marks);
    i_part = lar_automaton(combo, ap_count, why);
    if (!i_part) return std::nullopt;
  }
  if (!s_part && !c_part && !i_part) {
    if (why) *why = "mixed split failed";
    return std::nullopt;
  }
  return combine_parts(s_part, c_part, i_part, conjunction, ap_count, why);
}

// Merge adjacent same-parity colors; only the parity and relative order of
// colors matter under max-odd, and fewer colors mean a shallower recursion
// for every downstream parity solver.
void compress_colors(Dpa& d) {
  std::set<size_t> used;
  for (const auto& es : d.edges)
    for (const auto& e : es) used.insert(e.color);
  if (used.empty()) return;
  std::map<size_t, size_t> remap;
  size_t next = *used.begin() % 2 == 1 ? 1 : 0;
  size_t prev_parity = next % 2;
  bool first = true;
  for (size_t c : used) {
    if (!first && c % 2 != prev_parity) {
      ++next;
      prev_parity = c % 2;
    }
    first = false;
    remap[c] = next;
  }
  for (auto& es : d.edges)
    for (auto& e : es) e.color = remap[e.color];
  d.num_colors = next + 1;
}

std::optional<Dpa> translate_nnf(const PFormPtr& f, size_t ap_count,
                                 std::string* why) {
  if (f->op == Op::True) return trivial_automaton(true, ap_count);
  if (f->op == Op::False) return trivial_automaton(false, ap_count);
  if (is_safety_nnf(f))
    return progression_automaton(f, ap_count, /*safety=*/true, why);
  if (is_cosafety_nnf(f))
    return progression_automaton(f, ap_count, /*safety=*/false, why);
  if (is_inf_combo(f)) {
    InfCombo combo;
    combo.verdict = combo_verdict(f, combo.marks);
    return lar_automaton(combo, ap_count, why);
  }
  if (f->op == Op::And) return translate_mixed(f, ap_count, true, why);
  if (f->op == Op::Or) return translate_mixed(f, ap_count, false, why);
  if (why) *why = "formula outside the supported fragment";
  return std::nullopt;
}

}  // namespace

PFormPtr parse_pltl(const std::string& text) {
  PParser p{text};
  return p.parse();
}

std::optional<Dpa> translate(const PFormPtr& f, std::string* why) {
  size_t ap_count = max_ap(f);
  if (ap_count > kMaxAp) {
    if (why) *why = "too many atomic propositions";
    return std::nullopt;
  }
  PFormPtr n = nnf(f, true);
  auto d = translate_nnf(n, ap_count, why);
  if (d) compress_colors(*d);
  return d;
}

std::string to_hoa(const Dpa& d) {
  std::ostringstream os;
  os << "HOA: v1\n";
  os << "tool: \"issy-ltl\" \"0.1\"\n";
  os << "States: " << d.num_states << "\n";
  os << "Start: " << d.initial << "\n";
  os << "AP: " << d.ap_count;
  for (size_t i = 0; i < d.ap_count; ++i) os << " \"p" << i << "\"";
  os << "\n";
  os << "acc-name: parity max odd " << d.num_colors << "\n";
  // parity max odd acceptance formula
  std::function<std::string(int)> acc = [&](int c) -> std::string {
    if (c < 0) return "f";
    std::string rest = acc(c - 1);
    if (c % 2 == 1) {
      if (rest == "f") return "Inf(" + std::to_string(c) + ")";
      return "Inf(" + std::to_string(c) + ") | (Fin(" + std::to_string(c) +
             ") & (" + rest + "))";
    }
    if (rest == "f") return "f";
    return "Fin(" + std::to_string(c) + ") & (" + rest + ")";
  };
  os << "Acceptance: " << d.num_colors << " "
     << acc(static_cast<int>(d.num_colors) - 1) << "\n";
  os << "properties: trans-labels explicit-labels trans-acc colored "
        "deterministic complete\n";
  os << "--BODY--\n";
  for (size_t s = 0; s < d.num_states; ++s) {
    os << "State: " << s << "\n";
    // merge edges by (target, color)
    std::map<std::pair<size_t, size_t>, std::vector<uint32_t>> groups;
    for (const auto& e : d.edges[s])
      groups[{e.target, e.color}].push_back(e.minterm);
    for (const auto& [key, minterms] : groups) {
      os << "[";
      if (minterms.size() == (1u << d.ap_count)) {
        os << "t";
      } else {
        for (size_t i = 0; i < minterms.size(); ++i) {
          if (i) os << " | ";
          if (d.ap_count == 0) {
            os << "t";
            continue;
          }
          for (size_t a = 0; a < d.ap_count; ++a) {
            if (a) os << "&";
            if (!((minterms[i] >> a) & 1)) os << "!";
            os << a;
          }
        }
      }
      os << "] " << key.first << " {" << key.second << "}\n";
    }
  }
  os << "--END--\n";
  return os.str();
}

// --- lasso evaluation ------------------------------------------------------------

bool eval_lasso(const PFormPtr& f, const std::vector<uint32_t>& stem,
                const std::vector<uint32_t>& loop) {
  size_t S = stem.size();
  size_t L = loop.size();
  size_t N = S + L;
  auto letter = [&](size_t i) { return i < S ? stem[i] : loop[i - S]; };
  auto succ = [&](size_t i) { return i + 1 < N ? i + 1 : S; };

  std::map<const PForm*, std::vector<bool>> memo;
  std::function<const std::vector<bool>&(const PFormPtr&)> vec =
      [&](const PFormPtr& g) -> const std::vector<bool>& {
    auto it = memo.find(g.get());
    if (it != memo.end()) return it->second;
    std::vector<bool> v(N, false);
    switch (g->op) {
      case Op::True: v.assign(N, true); break;
      case Op::False: v.assign(N, false); break;
      case Op::Ap:
        for (size_t i = 0; i < N; ++i) v[i] = (letter(i) >> g->ap) & 1;
        break;
      case Op::Not: {
        const auto& a = vec(g->kids[0]);
        for (size_t i = 0; i < N; ++i) v[i] = !a[i];
        break;
      }
      case Op::And:
      case Op::Or: {
        v.assign(N, g->op == Op::And);
        for (const auto& k : g->kids) {
          const auto& a = vec(k);
          for (size_t i = 0; i < N; ++i)
            v[i] = g->op == Op::And ? (v[i] && a[i]) : (v[i] || a[i]);
        }
        break;
      }
      case Op::Implies: {
        const auto& a = vec(g->kids[0]);
        const auto& b = vec(g->kids[1]);
        for (size_t i = 0; i < N; ++i) v[i] = !a[i] || b[i];
        break;
      }
      case Op::Iff: {
        const auto& a = vec(g->kids[0]);
        const auto& b = vec(g->kids[1]);
        for (size_t i = 0; i < N; ++i) v[i] = a[i] == b[i];
        break;
      }
      case Op::Next: {
        const auto& a = vec(g->kids[0]);
        for (size_t i = 0; i < N; ++i) v[i] = a[succ(i)];
        break;
      }
      case Op::Eventually:
      case Op::Globally:
      case Op::Until:
      case Op::WeakUntil:
      case Op::Release: {
        bool nu = g->op == Op::Globally || g->op == Op::WeakUntil ||
                  g->op == Op::Release;
        v.assign(N, nu);
        const std::vector<bool>* a = nullptr;
        const std::vector<bool>* b = nullptr;
        if (g->kids.size() == 2) {
          a = &vec(g->kids[0]);
          b = &vec(g->kids[1]);
        } else {
          a = &vec(g->kids[0]);
        }
        // backward sweeps to the fixpoint (two passes around the lasso
        // suffice, a few extra are harmless)
        for (size_t pass = 0; pass < N + 2; ++pass) {
          bool changed = false;
          for (size_t ii = N; ii-- > 0;) {
            bool nv = v[ii];
            bool nxt = v[succ(ii)];
            switch (g->op) {
              case Op::Eventually: nv = (*a)[ii] || nxt; break;
              case Op::Globally: nv = (*a)[ii] && nxt; break;
              case Op::Until: nv = (*b)[ii] || ((*a)[ii] && nxt); break;
              case Op::WeakUntil: nv = (*b)[ii] || ((*a)[ii] && nxt); break;
              case Op::Release:
                nv = (*b)[ii] && ((*a)[ii] || nxt);
                break;
              default: break;
            }
            if (nv != v[ii]) {
              v[ii] = nv;
              changed = true;
            }
          }
          if (!changed) break;
        }
        break;
      }
    }
    return memo.emplace(g.get(), std::move(v)).first->second;
  };
  return vec(f)[0];
}

bool dpa_accepts(const Dpa& d, const std::vector<uint32_t>& stem,
                 const std::vector<uint32_t>& loop) {
  size_t S = stem.size();
  size_t L = loop.size();
  auto letter = [&](size_t i) { return i < S ? stem[i] : loop[(i - S) % L]; };

  // run until (position-in-loop, state) repeats
  std::map<std::pair<size_t, size_t>, size_t> seen;  // -> step index
  std::vector<size_t> colors;
  size_t state = d.initial;
  for (size_t step = 0;; ++step) {
    if (step >= S) {
      auto key = std::make_pair((step - S) % L, state);
      auto it = seen.find(key);
      if (it != seen.end()) {
        // colors in the cycle it->second .. step-1
        size_t maxc = 0;
        for (size_t i = it->second; i < step; ++i)
          maxc = std::max(maxc, colors[i]);
        return maxc % 2 == 1;
      }
      seen[key] = step;
    }
    uint32_t v = letter(step) & ((1u << d.ap_count) - 1);
    if (d.ap_count == 0) v = 0;
    const auto& e = d.edges[state][v];
    colors.push_back(e.color);
    state = e.target;
  }
}

}  // namespace issy::ltlgen
