#include "issy/smtcore.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace issy::smtcore {

namespace {

struct Bail : std::runtime_error {
  explicit Bail(const std::string& why) : std::runtime_error(why) {}
};

struct Ctx {
  const SymTab& syms;
  Budget budget{};
  size_t lit_count = 0;
  size_t ops = 0;
  int fresh = 0;
  std::map<std::string, Sort> locals;  // quantifier-bound + introduced names

  Sort sort_of(const std::string& name) const {
    auto jt = locals.find(name);  // bound names shadow declarations
    if (jt != locals.end()) return jt->second;
    auto it = syms.find(name);
    if (it != syms.end()) return it->second;
    throw Bail("undeclared symbol " + name);
  }

  std::string fresh_name(const std::string& stem, Sort s) {
    std::string n;
    do {
      n = "!" + stem + std::to_string(fresh++);
    } while (syms.count(n) || locals.count(n));
    locals[n] = s;
    return n;
  }

  void tick() {
    if ((++ops & 0x3ff) == 0 && budget.expired()) throw Bail("timeout");
  }
  void count_lits(size_t n) {
    lit_count += n;
    if (lit_count > budget.max_literals) throw Bail("formula size limit");
  }
};

// --- linear sums --------------------------------------------------------------

// Σ coef·var + constant, with exact rational coefficients.
struct LinSum {
  std::map<std::string, Rational> coef;
  Rational cst;

  bool ground() const { return coef.empty(); }

  void add(const LinSum& o, const Rational& k) {
    for (const auto& [v, c] : o.coef) {
      Rational n = at(v) + c * k;
      if (n.is_zero())
        coef.erase(v);
      else
        coef[v] = n;
    }
    cst = cst + o.cst * k;
  }
  Rational at(const std::string& v) const {
    auto it = coef.find(v);
    return it == coef.end() ? Rational(0) : it->second;
  }
  void scale(const Rational& k) {
    if (k.is_zero()) {
      coef.clear();
      cst = Rational(0);
      return;
    }
    for (auto& [v, c] : coef) c = c * k;
    cst = cst * k;
  }
  void drop(const std::string& v) { coef.erase(v); }

  bool operator==(const LinSum& o) const {
    return cst == o.cst && coef == o.coef;
  }
  bool operator<(const LinSum& o) const {
    if (!(cst == o.cst)) {
      if (cst.num() != o.cst.num()) return cst.num() < o.cst.num();
      return cst.den() < o.cst.den();
    }
    auto key = [](const Rational& r) {
      return std::pair<int64_t, int64_t>(r.num(), r.den());
    };
    auto l = coef.begin();
    auto r = o.coef.begin();
    for (; l != coef.end() && r != o.coef.end(); ++l, ++r) {
      if (l->first != r->first) return l->first < r->first;
      if (!(l->second == r->second)) return key(l->second) < key(r->second);
    }
    return coef.size() < o.coef.size();
  }
};

// --- NNF formulas over linear literals -----------------------------------------

// Literal: sum ⋈ 0, a divisibility d | sum, or a boolean variable.
struct Lit {
  enum class Kind {
    True,
    False,
    Le,   // sum <= 0
    Lt,   // sum < 0
    Eq,   // sum = 0
    Ne,   // sum != 0
    Div,  // modulus | sum
    NDiv,
    BoolVar,
    NegBoolVar,
  };
  Kind kind = Kind::True;
  LinSum sum;
  int64_t modulus = 0;
  std::string bvar;
};

struct NF {
  enum class Kind { Lit, And, Or };
  Kind kind = Kind::Lit;
  Lit lit;
  std::vector<NF> kids;

  static NF t() { return lit_node({Lit::Kind::True, {}, 0, {}}); }
  static NF f() { return lit_node({Lit::Kind::False, {}, 0, {}}); }
  static NF lit_node(Lit l) {
    NF n;
    n.kind = Kind::Lit;
    n.lit = std::move(l);
    return n;
  }
  static NF conj(std::vector<NF> ks) {
    NF n;
    n.kind = Kind::And;
    n.kids = std::move(ks);
    return n;
  }
  static NF disj(std::vector<NF> ks) {
    NF n;
    n.kind = Kind::Or;
    n.kids = std::move(ks);
    return n;
  }
  bool is_true() const {
    return kind == Kind::Lit && lit.kind == Lit::Kind::True;
  }
  bool is_false() const {
    return kind == Kind::Lit && lit.kind == Lit::Kind::False;
  }
};

// Ground literal evaluation; literals with variables return nullopt.
std::optional<bool> lit_value(const Lit& l) {
  switch (l.kind) {
    case Lit::Kind::True: return true;
    case Lit::Kind::False: return false;
    case Lit::Kind::BoolVar:
    case Lit::Kind::NegBoolVar: return std::nullopt;
    default: break;
  }
  if (!l.sum.ground()) return std::nullopt;
  const Rational& c = l.sum.cst;
  switch (l.kind) {
    case Lit::Kind::Le: return c <= Rational(0);
    case Lit::Kind::Lt: return c < Rational(0);
    case Lit::Kind::Eq: return c.is_zero();
    case Lit::Kind::Ne: return !c.is_zero();
    case Lit::Kind::Div:
      if (!c.is_integer()) return false;
      return Rational::euclid_mod(c.num(), l.modulus) == 0;
    case Lit::Kind::NDiv:
      if (!c.is_integer()) return true;
      return Rational::euclid_mod(c.num(), l.modulus) != 0;
    default: return std::nullopt;
  }
}

Lit negate_lit(const Lit& l) {
  Lit n = l;
  switch (l.kind) {
    case Lit::Kind::True: n.kind = Lit::Kind::False; break;
    case Lit::Kind::False: n.kind = Lit::Kind::True; break;
    case Lit::Kind::Le:  // ¬(s <= 0) == -s < 0
      n.kind = Lit::Kind::Lt;
      n.sum.scale(Rational(-1));
      break;
    case Lit::Kind::Lt:
      n.kind = Lit::Kind::Le;
      n.sum.scale(Rational(-1));
      break;
    case Lit::Kind::Eq: n.kind = Lit::Kind::Ne; break;
    case Lit::Kind::Ne: n.kind = Lit::Kind::Eq; break;
    case Lit::Kind::Div: n.kind = Lit::Kind::NDiv; break;
    case Lit::Kind::NDiv: n.kind = Lit::Kind::Div; break;
    case Lit::Kind::BoolVar: n.kind = Lit::Kind::NegBoolVar; break;
    case Lit::Kind::NegBoolVar: n.kind = Lit::Kind::BoolVar; break;
  }
  return n;
}

bool lit_equal(const Lit& a, const Lit& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Lit::Kind::True:
    case Lit::Kind::False: return true;
    case Lit::Kind::BoolVar:
    case Lit::Kind::NegBoolVar: return a.bvar == b.bvar;
    case Lit::Kind::Div:
    case Lit::Kind::NDiv: return a.modulus == b.modulus && a.sum == b.sum;
    default: return a.sum == b.sum;
  }
}

NF simplify(Ctx& cx, NF n);

// Merges parallel bounds on the same linear form inside a flat
// conjunction/disjunction: in an And `s <= 3, s <= 5` keeps the tighter
// bound and `s <= 3, s >= 5` collapses to false; dually for Or. The
// Ferrante-Rackoff and Cooper outputs are dominated by such bounds.
// Returns true when the whole node collapses to a constant (written to
// *collapsed).
bool merge_bounds(std::vector<NF>& kept, bool is_and, bool* collapsed) {
  struct Bounds {
    // upper: s <= u (or < with strict); lower: s >= l
    bool has_upper = false, upper_strict = false;
    Rational upper;
    bool has_lower = false, lower_strict = false;
    Rational lower;
    std::vector<size_t> members;  // indices into kept
  };
  // key: coefficient part of the sum (constant dropped), canonicalized so
  // that s and -s share a key with a sign flag
  std::map<std::string, Bounds> groups;
  auto key_of = [](const LinSum& s, bool* flipped) {
    // orient by the first coefficient's sign
    if (s.coef.empty()) return std::string();
    bool flip = s.coef.begin()->second < Rational(0);
    std::string k;
    for (const auto& [v, c] : s.coef) {
      Rational cc = flip ? -c : c;
      k += v + ":" + cc.to_string() + ";";
    }
    *flipped = flip;
    return k;
  };

  bool any_merge = false;
  for (size_t i = 0; i < kept.size(); ++i) {
    if (kept[i].kind != NF::Kind::Lit) continue;
    const Lit& l = kept[i].lit;
    if (l.kind != Lit::Kind::Le && l.kind != Lit::Kind::Lt) continue;
    if (l.sum.coef.empty()) continue;
    bool flipped = false;
    std::string key = key_of(l.sum, &flipped);
    // l: S + k ⋈ 0 where S is the oriented coef part. Oriented: if flipped,
    // the literal is -S - (-k) ⋈ 0, i.e. S >= k (Le) / S > k (Lt) with
    // bound k = cst when flipped, else S <= -cst.
    Bounds& b = groups[key];
    b.members.push_back(i);
    if (!flipped) {
      Rational u = -l.sum.cst;
      bool strict = l.kind == Lit::Kind::Lt;
      bool tighter = !b.has_upper || u < b.upper ||
                     (u == b.upper && strict && !b.upper_strict);
      if (tighter) {
        b.has_upper = true;
        b.upper = u;
        b.upper_strict = strict;
      }
    } else {
      Rational lo = l.sum.cst;
      bool strict = l.kind == Lit::Kind::Lt;
      bool tighter = !b.has_lower || lo > b.lower ||
                     (lo == b.lower && strict && !b.lower_strict);
      if (tighter) {
        b.has_lower = true;
        b.lower = lo;
        b.lower_strict = strict;
      }
    }
  }

  for (auto& [key, b] : groups) {
    if (b.members.size() < 2 && !(b.has_upper && b.has_lower)) continue;
    if (is_and) {
      // conjunction: conflict check, then keep only the tight bounds
      if (b.has_upper && b.has_lower) {
        if (b.upper < b.lower ||
            (b.upper == b.lower && (b.upper_strict || b.lower_strict))) {
          *collapsed = true;  // empty interval
          return true;
        }
      }
      if (b.members.size() < 2) continue;
    } else {
      // disjunction: totality check (bounds cover the whole line)
      if (b.has_upper && b.has_lower) {
        if (b.lower < b.upper || (b.lower == b.upper &&
                                  !(b.upper_strict && b.lower_strict))) {
          *collapsed = true;  // S <= u or S >= l with l <= u covers all
          return true;
        }
      }
      if (b.members.size() < 2) continue;
    }
    // rebuild: keep one upper and one lower literal (tightest for And,
    // weakest for Or). For Or the weakest bound is the max upper / min
    // lower, recomputed below.
    if (!is_and) {
      // recompute weakest for disjunction
      bool hu = false, hl = false, us = false, ls = false;
      Rational u, lo;
      for (size_t idx : b.members) {
        const Lit& l = kept[idx].lit;
        bool flipped = l.sum.coef.begin()->second < Rational(0);
        bool strict = l.kind == Lit::Kind::Lt;
        if (!flipped) {
          Rational v = -l.sum.cst;
          if (!hu || v > u || (v == u && !strict && us)) {
            hu = true;
            u = v;
            us = strict;
          }
        } else {
          Rational v = l.sum.cst;
          if (!hl || v < lo || (v == lo && !strict && ls)) {
            hl = true;
            lo = v;
            ls = strict;
          }
        }
      }
      b.has_upper = hu;
      b.upper = u;
      b.upper_strict = us;
      b.has_lower = hl;
      b.lower = lo;
      b.lower_strict = ls;
    }
    bool kept_upper = false, kept_lower = false;
    for (size_t idx : b.members) {
      const Lit& l = kept[idx].lit;
      bool flipped = l.sum.coef.begin()->second < Rational(0);
      bool strict = l.kind == Lit::Kind::Lt;
      bool keep = false;
      if (!flipped && b.has_upper && !kept_upper &&
          -l.sum.cst == b.upper && strict == b.upper_strict) {
        keep = true;
        kept_upper = true;
      } else if (flipped && b.has_lower && !kept_lower &&
                 l.sum.cst == b.lower && strict == b.lower_strict) {
        keep = true;
        kept_lower = true;
      }
      if (!keep) {
        kept[idx] = NF::t();  // marked; filtered by the caller
        any_merge = true;
      }
    }
  }
  return any_merge;
}

NF simplify_node(Ctx& cx, NF n) {
  cx.tick();
  if (n.kind == NF::Kind::Lit) {
    if (auto v = lit_value(n.lit)) return *v ? NF::t() : NF::f();
    return n;
  }
  bool is_and = n.kind == NF::Kind::And;
  std::vector<NF> flat;
  for (auto& k : n.kids) {
    NF s = simplify(cx, std::move(k));
    if (is_and ? s.is_true() : s.is_false()) continue;
    if (is_and ? s.is_false() : s.is_true()) return is_and ? NF::f() : NF::t();
    if (s.kind == n.kind) {
      for (auto& inner : s.kids) flat.push_back(std::move(inner));
    } else {
      flat.push_back(std::move(s));
    }
  }
  // Dedupe literals; detect complementary pairs.
  std::vector<NF> kept;
  for (auto& k : flat) {
    bool drop = false;
    if (k.kind == NF::Kind::Lit) {
      Lit negk = negate_lit(k.lit);
      for (const auto& e : kept) {
        if (e.kind != NF::Kind::Lit) continue;
        if (lit_equal(e.lit, k.lit)) {
          drop = true;
          break;
        }
        if (lit_equal(e.lit, negk)) return is_and ? NF::f() : NF::t();
      }
    }
    if (!drop) kept.push_back(std::move(k));
  }
  // Clause subsumption between flat literal conjunctions/disjunctions: in a
  // disjunction a clause that extends another is redundant; dually for
  // conjunctions. Keeps the quantifier-elimination output from snowballing.
  if (kept.size() > 1 && kept.size() <= 64) {
    auto lits_of = [](const NF& k) -> std::optional<std::vector<const Lit*>> {
      if (k.kind == NF::Kind::Lit) return std::vector<const Lit*>{&k.lit};
      std::vector<const Lit*> out;
      for (const auto& inner : k.kids) {
        if (inner.kind != NF::Kind::Lit) return std::nullopt;
        out.push_back(&inner.lit);
      }
      return out;
    };
    // in an Or, clause kids are And-shaped; in an And they are Or-shaped
    std::vector<std::optional<std::vector<const Lit*>>> sigs;
    sigs.reserve(kept.size());
    for (const auto& k : kept) {
      bool clause_shape =
          k.kind == NF::Kind::Lit ||
          (is_and ? k.kind == NF::Kind::Or : k.kind == NF::Kind::And);
      sigs.push_back(clause_shape ? lits_of(k) : std::nullopt);
    }
    auto contains_all = [](const std::vector<const Lit*>& small,
                           const std::vector<const Lit*>& big) {
      if (small.size() > big.size()) return false;
      for (const Lit* s : small) {
        bool found = false;
        for (const Lit* b : big)
          if (lit_equal(*s, *b)) {
            found = true;
            break;
          }
        if (!found) return false;
      }
      return true;
    };
    std::vector<bool> dead(kept.size(), false);
    for (size_t i = 0; i < kept.size(); ++i) {
      if (dead[i] || !sigs[i]) continue;
      for (size_t j = 0; j < kept.size(); ++j) {
        if (i == j || dead[j] || !sigs[j]) continue;
        // i subsumes j when i's literal set is contained in j's
        if (contains_all(*sigs[i], *sigs[j]) &&
            (sigs[i]->size() < sigs[j]->size() || i < j))
          dead[j] = true;
      }
    }
    std::vector<NF> pruned;
    for (size_t i = 0; i < kept.size(); ++i)
      if (!dead[i]) pruned.push_back(std::move(kept[i]));
    kept = std::move(pruned);
  }
  if (kept.size() > 1) {
    bool collapsed = false;
    if (merge_bounds(kept, is_and, &collapsed)) {
      if (collapsed) return is_and ? NF::f() : NF::t();
      // merged-away literals were tombstoned with True; each is implied by
      // (And) or implies (Or) a literal that was kept, so dropping them is
      // sound in both polarities
      std::vector<NF> filtered;
      for (auto& k : kept) {
        if (k.kind == NF::Kind::Lit && k.lit.kind == Lit::Kind::True)
          continue;
        filtered.push_back(std::move(k));
      }
      kept = std::move(filtered);
    } else if (collapsed) {
      return is_and ? NF::f() : NF::t();
    }
  }
  if (kept.empty()) return is_and ? NF::t() : NF::f();
  if (kept.size() == 1) return std::move(kept[0]);
  cx.count_lits(kept.size());
  NF out;
  out.kind = n.kind;
  out.kids = std::move(kept);
  return out;
}

NF simplify(Ctx& cx, NF n) { return simplify_node(cx, std::move(n)); }

// --- Term -> NF ----------------------------------------------------------------

// Linearizes a numeric term. Throws Bail on nonlinear / unsupported shapes.
// mod/abs/ite below numeric positions are lowered by the caller beforehand.
LinSum linearize(Ctx& cx, const TermPtr& t) {
  cx.tick();
  LinSum s;
  switch (t->kind) {
    case Term::Kind::Const:
      s.cst = t->value;
      return s;
    case Term::Kind::Var:
      if (t->primed) throw Bail("primed variable reached the backend");
      s.coef[t->var] = Rational(1);
      return s;
    case Term::Kind::App:
      break;
    default:
      throw Bail("unsupported numeric term");
  }
  switch (t->op) {
    case Op::Add:
      for (const auto& a : t->args) s.add(linearize(cx, a), Rational(1));
      return s;
    case Op::Sub:
      if (t->args.size() == 1) {
        s.add(linearize(cx, t->args[0]), Rational(-1));
        return s;
      }
      s = linearize(cx, t->args[0]);
      for (size_t i = 1; i < t->args.size(); ++i)
        s.add(linearize(cx, t->args[i]), Rational(-1));
      return s;
    case Op::Mul: {
      Rational k(1);
      std::optional<LinSum> var_part;
      for (const auto& a : t->args) {
        LinSum p = linearize(cx, a);
        if (p.ground()) {
          k = k * p.cst;
        } else if (!var_part) {
          var_part = std::move(p);
        } else {
          throw Bail("nonlinear multiplication");
        }
      }
      if (!var_part) {
        s.cst = k;
        return s;
      }
      var_part->scale(k);
      return *var_part;
    }
    case Op::Div: {
      LinSum a = linearize(cx, t->args[0]);
      LinSum b = linearize(cx, t->args[1]);
      if (!b.ground() || b.cst.is_zero()) throw Bail("nonlinear division");
      a.scale(Rational(1) / b.cst);
      return a;
    }
    case Op::ToReal:
      return linearize(cx, t->args[0]);
    default:
      throw Bail(std::string("unsupported numeric operator ") +
                 op_name(t->op));
  }
}

// Mixed-sort atoms (an Int and a Real variable in one constraint) are outside
// the supported fragment.
enum class Domain { IntD, RealD, GroundD };

Domain atom_domain(Ctx& cx, const LinSum& s) {
  bool any_int = false, any_real = false;
  for (const auto& [v, c] : s.coef) {
    Sort so = cx.sort_of(v);
    any_int = any_int || so == Sort::Int;
    any_real = any_real || so == Sort::Real;
  }
  if (any_int && any_real) throw Bail("mixed Int/Real atom");
  if (any_real) return Domain::RealD;
  if (any_int) return Domain::IntD;
  return Domain::GroundD;
}

// Integer atoms get integer coefficients (comparisons scale freely).
void clear_denominators(LinSum& s) {
  int64_t l = 1;
  for (const auto& [v, c] : s.coef) l = lcm_chk(l, c.den());
  l = lcm_chk(l, s.cst.den());
  if (l != 1) s.scale(Rational(l));
}

NF make_cmp(Ctx& cx, Lit::Kind kind, LinSum s) {
  if (atom_domain(cx, s) == Domain::IntD) clear_denominators(s);
  Lit l;
  l.kind = kind;
  l.sum = std::move(s);
  return NF::lit_node(std::move(l));
}

// Builds the NF for `a ⋈ b`, handling Bool-sorted equality via expansion.
NF to_nf(Ctx& cx, const TermPtr& t, bool positive);

bool is_bool_sorted(Ctx& cx, const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::BoolConst: return true;
    case Term::Kind::Var: {
      auto it = cx.syms.find(t->var);
      if (it != cx.syms.end()) return it->second == Sort::Bool;
      auto jt = cx.locals.find(t->var);
      return jt != cx.locals.end() && jt->second == Sort::Bool;
    }
    case Term::Kind::Quant: return true;
    case Term::Kind::App:
      switch (t->op) {
        case Op::And:
        case Op::Or:
        case Op::Not:
        case Op::Implies:
        case Op::Eq:
        case Op::Distinct:
        case Op::Lt:
        case Op::Gt:
        case Op::Le:
        case Op::Ge:
          return true;
        case Op::Ite:
          return is_bool_sorted(cx, t->args[1]);
        default:
          return false;
      }
    default: return false;
  }
}

NF compare_nf(Ctx& cx, Op op, const TermPtr& a, const TermPtr& b,
              bool positive) {
  if ((op == Op::Eq) && (is_bool_sorted(cx, a) || is_bool_sorted(cx, b))) {
    // Boolean iff: (a&&b) || (!a&&!b)
    NF pa = to_nf(cx, a, true), na = to_nf(cx, a, false);
    NF pb = to_nf(cx, b, true), nb = to_nf(cx, b, false);
    NF same = NF::disj({NF::conj({pa, pb}), NF::conj({na, nb})});
    if (positive) return same;
    return NF::disj({NF::conj({to_nf(cx, a, true), to_nf(cx, b, false)}),
                     NF::conj({to_nf(cx, a, false), to_nf(cx, b, true)})});
  }
  LinSum s = linearize(cx, a);
  s.add(linearize(cx, b), Rational(-1));
  // a op b  ==  s ⋈ 0
  Lit::Kind k;
  switch (op) {
    case Op::Le: k = Lit::Kind::Le; break;
    case Op::Lt: k = Lit::Kind::Lt; break;
    case Op::Ge: {
      s.scale(Rational(-1));
      k = Lit::Kind::Le;
      break;
    }
    case Op::Gt: {
      s.scale(Rational(-1));
      k = Lit::Kind::Lt;
      break;
    }
    case Op::Eq: k = Lit::Kind::Eq; break;
    default: throw Bail("bad comparison");
  }
  if (!positive) {
    // negate: build then negate literal kind
    NF n = make_cmp(cx, k, std::move(s));
    if (n.kind == NF::Kind::Lit) return NF::lit_node(negate_lit(n.lit));
    return n.is_true() ? NF::f() : NF::t();
  }
  return make_cmp(cx, k, std::move(s));
}

NF qe_nf(Ctx& cx, NF matrix, const std::vector<std::pair<std::string, Sort>>&
                                  bound, bool exists);

NF to_nf(Ctx& cx, const TermPtr& t, bool positive) {
  cx.tick();
  switch (t->kind) {
    case Term::Kind::BoolConst:
      return t->bval == positive ? NF::t() : NF::f();
    case Term::Kind::Var: {
      if (t->primed) throw Bail("primed variable reached the backend");
      Lit l;
      l.kind = positive ? Lit::Kind::BoolVar : Lit::Kind::NegBoolVar;
      l.bvar = t->var;
      return NF::lit_node(std::move(l));
    }
    case Term::Kind::Quant: {
      // Inner quantifiers are eliminated eagerly so the surrounding
      // elimination always sees a QF matrix.
      bool exists = (t->quant == Quantifier::Exists);
      for (const auto& [n, s] : t->bound) cx.locals[n] = s;
      NF body = to_nf(cx, t->body, true);
      NF elim = qe_nf(cx, std::move(body), t->bound, exists);
      for (const auto& [n, s] : t->bound) cx.locals.erase(n);
      if (!positive) {
        // ¬ of an eliminated QF formula: negate structurally.
        // Rebuild via De Morgan over the NF.
        std::function<NF(const NF&)> negf = [&](const NF& n) -> NF {
          if (n.kind == NF::Kind::Lit) return NF::lit_node(negate_lit(n.lit));
          std::vector<NF> ks;
          ks.reserve(n.kids.size());
          for (const auto& k : n.kids) ks.push_back(negf(k));
          return n.kind == NF::Kind::And ? NF::disj(std::move(ks))
                                         : NF::conj(std::move(ks));
        };
        return simplify(cx, negf(elim));
      }
      return elim;
    }
    case Term::Kind::Const:
      throw Bail("numeric constant in boolean position");
    case Term::Kind::App:
      break;
  }

  switch (t->op) {
    case Op::And:
    case Op::Or: {
      bool conj = (t->op == Op::And) == positive;
      std::vector<NF> ks;
      ks.reserve(t->args.size());
      for (const auto& a : t->args) ks.push_back(to_nf(cx, a, positive));
      return conj ? NF::conj(std::move(ks)) : NF::disj(std::move(ks));
    }
    case Op::Not:
      return to_nf(cx, t->args[0], !positive);
    case Op::Implies: {
      // right-assoc: a => b => c == a => (b => c)
      NF acc = to_nf(cx, t->args.back(), positive);
      for (size_t i = t->args.size() - 1; i-- > 0;) {
        if (positive)
          acc = NF::disj({to_nf(cx, t->args[i], false), std::move(acc)});
        else
          acc = NF::conj({to_nf(cx, t->args[i], true), std::move(acc)});
      }
      return acc;
    }
    case Op::Ite: {
      NF c = to_nf(cx, t->args[0], true);
      NF nc = to_nf(cx, t->args[0], false);
      NF a = to_nf(cx, t->args[1], positive);
      NF b = to_nf(cx, t->args[2], positive);
      return NF::disj({NF::conj({std::move(c), std::move(a)}),
                       NF::conj({std::move(nc), std::move(b)})});
    }
    case Op::Eq: {
      if (t->args.size() == 2)
        return compare_nf(cx, Op::Eq, t->args[0], t->args[1], positive);
      // chain equality
      std::vector<NF> ks;
      for (size_t i = 0; i + 1 < t->args.size(); ++i)
        ks.push_back(compare_nf(cx, Op::Eq, t->args[i], t->args[i + 1], true));
      NF all = NF::conj(std::move(ks));
      if (positive) return all;
      std::vector<NF> neg;
      for (size_t i = 0; i + 1 < t->args.size(); ++i)
        neg.push_back(
            compare_nf(cx, Op::Eq, t->args[i], t->args[i + 1], false));
      return NF::disj(std::move(neg));
    }
    case Op::Distinct: {
      std::vector<NF> ks;
      for (size_t i = 0; i < t->args.size(); ++i)
        for (size_t j = i + 1; j < t->args.size(); ++j)
          ks.push_back(
              compare_nf(cx, Op::Eq, t->args[i], t->args[j], !positive));
      return positive ? NF::conj(std::move(ks)) : NF::disj(std::move(ks));
    }
    case Op::Le:
    case Op::Lt:
    case Op::Ge:
    case Op::Gt: {
      if (t->args.size() == 2)
        return compare_nf(cx, t->op, t->args[0], t->args[1], positive);
      std::vector<NF> ks;
      for (size_t i = 0; i + 1 < t->args.size(); ++i)
        ks.push_back(
            compare_nf(cx, t->op, t->args[i], t->args[i + 1], positive));
      return positive ? NF::conj(std::move(ks)) : NF::disj(std::move(ks));
    }
    default:
      throw Bail(std::string("boolean position operator ") + op_name(t->op));
  }
}

// --- quantifier elimination per variable -----------------------------------------

bool lit_mentions(const Lit& l, const std::string& v) {
  switch (l.kind) {
    case Lit::Kind::BoolVar:
    case Lit::Kind::NegBoolVar:
      return l.bvar == v;
    case Lit::Kind::True:
    case Lit::Kind::False:
      return false;
    default:
      return l.sum.coef.count(v) != 0;
  }
}

bool nf_mentions(const NF& n, const std::string& v) {
  if (n.kind == NF::Kind::Lit) return lit_mentions(n.lit, v);
  for (const auto& k : n.kids)
    if (nf_mentions(k, v)) return true;
  return false;
}

NF subst_bool(Ctx& cx, const NF& n, const std::string& v, bool val) {
  cx.tick();
  if (n.kind == NF::Kind::Lit) {
    if (n.lit.kind == Lit::Kind::BoolVar && n.lit.bvar == v)
      return val ? NF::t() : NF::f();
    if (n.lit.kind == Lit::Kind::NegBoolVar && n.lit.bvar == v)
      return val ? NF::f() : NF::t();
    return n;
  }
  std::vector<NF> ks;
  ks.reserve(n.kids.size());
  for (const auto& k : n.kids) ks.push_back(subst_bool(cx, k, v, val));
  NF out;
  out.kind = n.kind;
  out.kids = std::move(ks);
  return out;
}

// Substitutes v := replacement (a LinSum) in all numeric literals.
NF subst_sum(Ctx& cx, const NF& n, const std::string& v, const LinSum& rep) {
  cx.tick();
  if (n.kind == NF::Kind::Lit) {
    Lit l = n.lit;
    if (lit_mentions(l, v) && l.kind != Lit::Kind::BoolVar &&
        l.kind != Lit::Kind::NegBoolVar) {
      Rational c = l.sum.at(v);
      l.sum.drop(v);
      l.sum.add(rep, c);
    }
    return NF::lit_node(std::move(l));
  }
  std::vector<NF> ks;
  ks.reserve(n.kids.size());
  for (const auto& k : n.kids) ks.push_back(subst_sum(cx, k, v, rep));
  NF out;
  out.kind = n.kind;
  out.kids = std::move(ks);
  return out;
}

// Ferrante-Rackoff for a real-sorted variable: ∃v. n
NF qe_real(Ctx& cx, const NF& n, const std::string& v) {
  // Boundary terms: solve each literal c·v + r ⋈ 0 for v: v ⋈ -r/c.
  std::vector<LinSum> bounds;
  std::function<void(const NF&)> collect = [&](const NF& m) {
    if (m.kind == NF::Kind::Lit) {
      const Lit& l = m.lit;
      if (l.kind == Lit::Kind::BoolVar || l.kind == Lit::Kind::NegBoolVar)
        return;
      Rational c = l.sum.at(v);
      if (c.is_zero()) return;
      LinSum b = l.sum;
      b.drop(v);
      b.scale(Rational(-1) / c);
      for (const auto& known : bounds)
        if (known == b) return;
      bounds.push_back(std::move(b));
      return;
    }
    for (const auto& k : m.kids) collect(k);
  };
  collect(n);

  // φ(-∞) / φ(+∞): limits of each literal.
  auto at_infinity = [&](bool pos_inf) {
    std::function<NF(const NF&)> walk = [&](const NF& m) -> NF {
      if (m.kind != NF::Kind::Lit) {
        std::vector<NF> ks;
        for (const auto& k : m.kids) ks.push_back(walk(k));
        NF out;
        out.kind = m.kind;
        out.kids = std::move(ks);
        return out;
      }
      const Lit& l = m.lit;
      if (l.kind == Lit::Kind::BoolVar || l.kind == Lit::Kind::NegBoolVar)
        return m;
      Rational c = l.sum.at(v);
      if (c.is_zero()) return m;
      bool to_pos = (c > Rational(0)) == pos_inf;  // sum -> +inf?
      switch (l.kind) {
        case Lit::Kind::Le:
        case Lit::Kind::Lt:
          return to_pos ? NF::f() : NF::t();
        case Lit::Kind::Eq: return NF::f();
        case Lit::Kind::Ne: return NF::t();
        default: throw Bail("divisibility on a real variable");
      }
    };
    return walk(n);
  };

  std::vector<NF> parts;
  parts.push_back(at_infinity(false));
  parts.push_back(at_infinity(true));
  for (size_t i = 0; i < bounds.size(); ++i) {
    for (size_t j = i; j < bounds.size(); ++j) {
      cx.tick();
      LinSum mid = bounds[i];
      mid.add(bounds[j], Rational(1));
      mid.scale(Rational(1, 2));
      parts.push_back(simplify(cx, subst_sum(cx, n, v, mid)));
    }
  }
  return simplify(cx, NF::disj(std::move(parts)));
}

// Cooper's algorithm for an int-sorted variable: ∃v. n
NF qe_int(Ctx& cx, const NF& n, const std::string& v) {
  // Step 1: collect coefficients; δ = lcm.
  int64_t delta = 1;
  bool seen = false;
  std::function<void(const NF&)> scan = [&](const NF& m) {
    if (m.kind == NF::Kind::Lit) {
      const Lit& l = m.lit;
      if (l.kind == Lit::Kind::BoolVar || l.kind == Lit::Kind::NegBoolVar)
        return;
      Rational c = l.sum.at(v);
      if (c.is_zero()) return;
      if (!c.is_integer())
        throw Bail("non-integer coefficient on Int variable");
      seen = true;
      delta = lcm_chk(delta, c.num());
    } else {
      for (const auto& k : m.kids) scan(k);
    }
  };
  scan(n);
  if (!seen) return n;

  // Step 2: normalize every literal to coefficient ±1 on v' = δ·v and add
  // the divisibility δ | v'. Literal scaling keeps direction (positive k).
  std::function<NF(const NF&)> unitize = [&](const NF& m) -> NF {
    if (m.kind != NF::Kind::Lit) {
      std::vector<NF> ks;
      for (const auto& k : m.kids) ks.push_back(unitize(k));
      NF out;
      out.kind = m.kind;
      out.kids = std::move(ks);
      return out;
    }
    Lit l = m.lit;
    if (l.kind == Lit::Kind::BoolVar || l.kind == Lit::Kind::NegBoolVar)
      return m;
    Rational c = l.sum.at(v);
    if (c.is_zero()) return m;
    int64_t k = delta / (c.num() < 0 ? -c.num() : c.num());
    l.sum.scale(Rational(k));
    if (l.kind == Lit::Kind::Div || l.kind == Lit::Kind::NDiv) {
      int64_t nm;  // m | s scales to k·m | k·s
      if (__builtin_mul_overflow(l.modulus, k, &nm)) throw overflow_error();
      l.modulus = nm;
    }
    // now coefficient is ±delta; rename to coefficient ±1
    Rational cc = l.sum.at(v);
    l.sum.drop(v);
    l.sum.coef[v] = cc > Rational(0) ? Rational(1) : Rational(-1);
    return NF::lit_node(std::move(l));
  };
  NF u = unitize(n);
  if (delta > 1) {
    Lit dl;
    dl.kind = Lit::Kind::Div;
    dl.modulus = delta;
    dl.sum.coef[v] = Rational(1);
    u = NF::conj({std::move(u), NF::lit_node(std::move(dl))});
  }

  // Step 3: D = lcm of divisibility moduli; B = strict lower bounds (v > b).
  // A literal contributes to B when its truth can flip from false to true as
  // v grows past a boundary: v >= t, v > t, v = t, and v != t all do.
  int64_t period = 1;
  std::vector<LinSum> lower;
  auto push_lower = [&](LinSum b) {
    for (const auto& known : lower)
      if (known == b) return;
    lower.push_back(std::move(b));
  };
  std::function<void(const NF&)> gather = [&](const NF& m) {
    if (m.kind != NF::Kind::Lit) {
      for (const auto& k : m.kids) gather(k);
      return;
    }
    const Lit& l = m.lit;
    if (l.kind == Lit::Kind::BoolVar || l.kind == Lit::Kind::NegBoolVar)
      return;
    Rational c = l.sum.at(v);
    if (c.is_zero()) return;
    if (l.kind == Lit::Kind::Div || l.kind == Lit::Kind::NDiv) {
      period = lcm_chk(period, l.modulus);
      return;
    }
    // literal: c·v + r ⋈ 0 with c ∈ {+1,-1}; boundary point is v = -r/c.
    LinSum point = l.sum;
    point.drop(v);
    point.scale(c > Rational(0) ? Rational(-1) : Rational(1));
    bool pos = c > Rational(0);
    switch (l.kind) {
      case Lit::Kind::Le:  // pos: v <= -r (upper); neg: v >= r -> b = r-1
        if (!pos) {
          point.cst = point.cst - Rational(1);
          push_lower(std::move(point));
        }
        break;
      case Lit::Kind::Lt:  // neg: v > r -> b = r
        if (!pos) push_lower(std::move(point));
        break;
      case Lit::Kind::Eq: {  // v = point -> b = point - 1
        point.cst = point.cst - Rational(1);
        push_lower(std::move(point));
        break;
      }
      case Lit::Kind::Ne:  // true again just above the point -> b = point
        push_lower(std::move(point));
        break;
      default:
        break;
    }
  };
  gather(u);

  // φ(-∞): drop bound literals by their limit as v -> -∞.
  std::function<NF(const NF&)> minus_inf = [&](const NF& m) -> NF {
    if (m.kind != NF::Kind::Lit) {
      std::vector<NF> ks;
      for (const auto& k : m.kids) ks.push_back(minus_inf(k));
      NF out;
      out.kind = m.kind;
      out.kids = std::move(ks);
      return out;
    }
    const Lit& l = m.lit;
    if (l.kind == Lit::Kind::BoolVar || l.kind == Lit::Kind::NegBoolVar)
      return m;
    Rational c = l.sum.at(v);
    if (c.is_zero()) return m;
    switch (l.kind) {
      case Lit::Kind::Le:
      case Lit::Kind::Lt:
        return c > Rational(0) ? NF::t() : NF::f();
      case Lit::Kind::Eq: return NF::f();
      case Lit::Kind::Ne: return NF::t();
      default: return m;  // divisibility: keep, will substitute j
    }
  };

  std::vector<NF> parts;
  NF fm = minus_inf(u);
  for (int64_t j = 1; j <= period; ++j) {
    cx.tick();
    LinSum rep;
    rep.cst = Rational(j);
    parts.push_back(simplify(cx, subst_sum(cx, fm, v, rep)));
  }
  for (const auto& b : lower) {
    for (int64_t j = 1; j <= period; ++j) {
      cx.tick();
      LinSum rep = b;
      rep.cst = rep.cst + Rational(j);
      parts.push_back(simplify(cx, subst_sum(cx, u, v, rep)));
    }
  }
  return simplify(cx, NF::disj(std::move(parts)));
}

// Capped DNF over x-mentioning subformulas: returns clauses (conjunctions)
// whose disjunction is equivalent to n, or nullopt past the cap.
std::optional<std::vector<NF>> dnf_clauses(Ctx& cx, const NF& n,
                                           size_t cap) {
  switch (n.kind) {
    case NF::Kind::Lit:
      return std::vector<NF>{n};
    case NF::Kind::Or: {
      std::vector<NF> out;
      for (const auto& k : n.kids) {
        auto kd = dnf_clauses(cx, k, cap);
        if (!kd) return std::nullopt;
        for (auto& c : *kd) out.push_back(std::move(c));
        if (out.size() > cap) return std::nullopt;
      }
      return out;
    }
    case NF::Kind::And: {
      std::vector<NF> acc{NF::t()};
      for (const auto& k : n.kids) {
        auto kd = dnf_clauses(cx, k, cap);
        if (!kd) return std::nullopt;
        std::vector<NF> next;
        for (const auto& a : acc)
          for (const auto& b : *kd) {
            next.push_back(simplify(cx, NF::conj({a, b})));
            if (next.size() > cap) return std::nullopt;
          }
        acc = std::move(next);
      }
      return acc;
    }
  }
  return std::nullopt;
}

// ∃ of a single variable, with miniscoping: distribute over disjunctions,
// pull out conjuncts that do not mention the variable, and fall back to a
// capped DNF so the core procedures mostly see literal conjunctions.
NF qe_exists_one(Ctx& cx, NF m, const std::string& name, Sort sort) {
  m = simplify(cx, std::move(m));
  if (!nf_mentions(m, name)) return m;
  if (m.kind == NF::Kind::Or) {
    std::vector<NF> ks;
    ks.reserve(m.kids.size());
    for (auto& k : m.kids)
      ks.push_back(qe_exists_one(cx, std::move(k), name, sort));
    return simplify(cx, NF::disj(std::move(ks)));
  }
  if (m.kind == NF::Kind::And) {
    std::vector<NF> with, without;
    for (auto& k : m.kids)
      (nf_mentions(k, name) ? with : without).push_back(std::move(k));
    NF inner = NF::conj(std::move(with));
    if (inner.kind == NF::Kind::And) {
      // mixed conjunction: expand the x-part to DNF so each clause gets its
      // own small test-point set
      bool nested_or = false;
      for (const auto& k : inner.kids)
        if (k.kind != NF::Kind::Lit) nested_or = true;
      if (nested_or) {
        auto clauses = dnf_clauses(cx, inner, 600);
        if (clauses) {
          std::vector<NF> ks;
          ks.reserve(clauses->size());
          for (auto& c : *clauses)
            ks.push_back(qe_exists_one(cx, std::move(c), name, sort));
          NF res = simplify(cx, NF::disj(std::move(ks)));
          if (!without.empty()) {
            without.push_back(std::move(res));
            return simplify(cx, NF::conj(std::move(without)));
          }
          return res;
        }
      }
    }
    if (!without.empty()) {
      NF done = qe_exists_one(cx, std::move(inner), name, sort);
      without.push_back(std::move(done));
      return simplify(cx, NF::conj(std::move(without)));
    }
    m = std::move(inner);
  }
  switch (sort) {
    case Sort::Bool:
      return simplify(cx, NF::disj({subst_bool(cx, m, name, true),
                                    subst_bool(cx, m, name, false)}));
    case Sort::Int:
      return qe_int(cx, m, name);
    case Sort::Real:
      return qe_real(cx, m, name);
  }
  return m;
}

// Free variables of an NF with their sorts, resolved through the context.
void nf_free_vars(Ctx& cx, const NF& n,
                  std::map<std::string, Sort>& out) {
  if (n.kind != NF::Kind::Lit) {
    for (const auto& k : n.kids) nf_free_vars(cx, k, out);
    return;
  }
  const Lit& l = n.lit;
  if (l.kind == Lit::Kind::BoolVar || l.kind == Lit::Kind::NegBoolVar) {
    out.emplace(l.bvar, Sort::Bool);
    return;
  }
  for (const auto& [v, c] : l.sum.coef) out.emplace(v, cx.sort_of(v));
}

// Internal unsatisfiability check by full elimination; Bail propagates to
// the caller (which then keeps the formula as-is).
bool nf_unsat(Ctx& cx, NF n) {
  std::map<std::string, Sort> vars;
  nf_free_vars(cx, n, vars);
  NF cur = simplify(cx, std::move(n));
  for (const auto& [name, sort] : vars) {
    if (cur.is_true() || cur.is_false()) break;
    cur = qe_exists_one(cx, std::move(cur), name, sort);
  }
  return cur.is_false();
}

NF negate_nf(const NF& n) {
  if (n.kind == NF::Kind::Lit) return NF::lit_node(negate_lit(n.lit));
  std::vector<NF> ks;
  ks.reserve(n.kids.size());
  for (const auto& k : n.kids) ks.push_back(negate_nf(k));
  return n.kind == NF::Kind::And ? NF::disj(std::move(ks))
                                 : NF::conj(std::move(ks));
}

// Drops disjuncts already covered by the union of the kept ones. Runs after
// each variable elimination so redundancy never compounds across rounds.
NF prune_or(Ctx& cx, NF n) {
  if (n.kind != NF::Kind::Or || n.kids.size() < 2 || n.kids.size() > 400)
    return n;
  std::vector<NF> sorted = std::move(n.kids);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const NF& a, const NF& b) {
                     auto count = [](const NF& x) {
                       return x.kind == NF::Kind::Lit ? 1 : x.kids.size();
                     };
                     return count(a) < count(b);
                   });
  std::vector<NF> kept;
  std::vector<NF> neg_kept;  // negations, conjoined incrementally
  for (auto& d : sorted) {
    if (!kept.empty()) {
      std::vector<NF> query = neg_kept;
      query.push_back(d);
      bool covered = false;
      try {
        covered = nf_unsat(cx, NF::conj(std::move(query)));
      } catch (const Bail&) {
        covered = false;  // keep it; pruning is best-effort
      }
      if (covered) continue;
    }
    neg_kept.push_back(negate_nf(d));
    kept.push_back(std::move(d));
  }
  return simplify(cx, NF::disj(std::move(kept)));
}

// ∃/∀ elimination of a quantifier block over an NF matrix.
NF qe_nf(Ctx& cx, NF matrix,
         const std::vector<std::pair<std::string, Sort>>& bound, bool exists) {
  NF m = simplify(cx, std::move(matrix));
  if (!exists) {
    std::function<NF(const NF&)> negf = [&](const NF& n) -> NF {
      if (n.kind == NF::Kind::Lit) return NF::lit_node(negate_lit(n.lit));
      std::vector<NF> ks;
      ks.reserve(n.kids.size());
      for (const auto& k : n.kids) ks.push_back(negf(k));
      return n.kind == NF::Kind::And ? NF::disj(std::move(ks))
                                     : NF::conj(std::move(ks));
    };
    NF inner = qe_nf(cx, negf(m), bound, true);
    return simplify(cx, negf(inner));
  }
  // Eliminate innermost-declared last so earlier vars may appear in bounds.
  for (auto it = bound.rbegin(); it != bound.rend(); ++it) {
    m = qe_exists_one(cx, std::move(m), it->first, it->second);
    m = prune_or(cx, std::move(m));
  }
  return m;
}

// --- lowering of mod/abs/numeric-ite before NNF ---------------------------------

// Rewrites mod/abs/numeric-ite into fresh existentially-defined variables at
// the top of the current scope. Each introduced variable is functionally
// determined, so the wrapping preserves equivalence under any polarity.
struct Lowerer {
  Ctx& cx;
  std::vector<std::pair<std::string, Sort>> defs;
  std::vector<TermPtr> constraints;

  TermPtr lower(const TermPtr& t) {
    cx.tick();
    switch (t->kind) {
      case Term::Kind::Const:
      case Term::Kind::BoolConst:
      case Term::Kind::Var:
        return t;
      case Term::Kind::Quant: {
        // Sub-scope: lower the body independently.
        for (const auto& [n, s] : t->bound) cx.locals[n] = s;
        TermPtr body = lower_scope(cx, t->body);
        for (const auto& [n, s] : t->bound) cx.locals.erase(n);
        auto q = std::make_shared<Term>(*t);
        q->body = body;
        return q;
      }
      case Term::Kind::App:
        break;
    }
    std::vector<TermPtr> args;
    args.reserve(t->args.size());
    for (const auto& a : t->args) args.push_back(lower(a));

    switch (t->op) {
      case Op::Mod: {
        // r = a mod m (Euclidean):  exists q: a = m*q + r, 0 <= r < |m|
        if (!args[1]->is_const() || !args[1]->value.is_integer() ||
            args[1]->value.is_zero())
          throw Bail("mod with non-constant modulus");
        int64_t m = args[1]->value.num();
        int64_t am = m < 0 ? -m : m;
        std::string r = cx.fresh_name("mod", Sort::Int);
        std::string q = cx.fresh_name("quo", Sort::Int);
        defs.push_back({q, Sort::Int});
        defs.push_back({r, Sort::Int});
        TermPtr rv = tm::var(r);
        TermPtr qv = tm::var(q);
        constraints.push_back(tm::eq(
            args[0],
            tm::add({tm::mul({tm::constant(m), qv}), rv})));
        constraints.push_back(tm::ge(rv, tm::constant(int64_t{0})));
        constraints.push_back(tm::lt(rv, tm::constant(am)));
        return rv;
      }
      case Op::Abs: {
        // r = |a|, functionally: (a >= 0 && r = a) || (a < 0 && r = -a)
        if (is_bool_sorted(cx, args[0])) throw Bail("abs on Bool");
        Sort s = guess_sort(args[0]);
        std::string r = cx.fresh_name("abs", s);
        defs.push_back({r, s});
        TermPtr rv = tm::var(r);
        constraints.push_back(tm::disj(
            {tm::conj({tm::ge(args[0], tm::constant(int64_t{0})),
                       tm::eq(rv, args[0])}),
             tm::conj({tm::lt(args[0], tm::constant(int64_t{0})),
                       tm::eq(rv, tm::minus(args[0]))})}));
        return rv;
      }
      case Op::Ite: {
        if (is_bool_sorted(cx, args[1])) break;  // boolean ite handled in NNF
        Sort s = guess_sort(args[1]);
        std::string r = cx.fresh_name("ite", s);
        defs.push_back({r, s});
        TermPtr rv = tm::var(r);
        constraints.push_back(
            tm::disj({tm::conj({args[0], tm::eq(rv, args[1])}),
                      tm::conj({normalize(tm::neg(args[0])),
                                tm::eq(rv, args[2])})}));
        return rv;
      }
      default:
        break;
    }
    return tm::app(t->op, std::move(args));
  }

  Sort guess_sort(const TermPtr& t) {
    // Int unless a Real variable or fractional constant occurs.
    for (const auto& fv : free_vars(t)) {
      auto it = cx.syms.find(fv.name);
      if (it != cx.syms.end() && it->second == Sort::Real) return Sort::Real;
      auto jt = cx.locals.find(fv.name);
      if (jt != cx.locals.end() && jt->second == Sort::Real)
        return Sort::Real;
    }
    std::function<bool(const TermPtr&)> frac = [&](const TermPtr& u) {
      if (u->is_const() && !u->value.is_integer()) return true;
      if (u->kind == Term::Kind::App) {
        if (u->op == Op::Div || u->op == Op::ToReal) return true;
        for (const auto& a : u->args)
          if (frac(a)) return true;
      }
      return false;
    };
    return frac(t) ? Sort::Real : Sort::Int;
  }

  static TermPtr lower_scope(Ctx& cx, const TermPtr& t) {
    Lowerer lw{cx, {}, {}};
    TermPtr body = lw.lower(t);
    if (lw.defs.empty()) return body;
    std::vector<TermPtr> cs = std::move(lw.constraints);
    cs.push_back(body);
    return tm::exists(lw.defs, tm::conj(std::move(cs)));
  }
};

// --- NF -> Term -----------------------------------------------------------------

TermPtr sum_to_term(const LinSum& s, bool int_domain) {
  std::vector<TermPtr> pos, neg;
  for (const auto& [v, c] : s.coef) {
    Rational a = c.abs();
    TermPtr m = a == Rational(1)
                    ? tm::var(v)
                    : tm::mul({tm::constant(a), tm::var(v)});
    (c > Rational(0) ? pos : neg).push_back(m);
  }
  (void)int_domain;
  Rational k = s.cst;
  // Render as  pos_terms <= -(cst) + neg_terms style handled by caller; here
  // produce the raw sum including the constant.
  std::vector<TermPtr> all = pos;
  for (auto& n : neg) all.push_back(tm::minus(n));
  if (!k.is_zero() || all.empty()) all.push_back(tm::constant(k));
  if (all.size() == 1) return all[0];
  return tm::add(std::move(all));
}

TermPtr lit_to_term(const Lit& l) {
  switch (l.kind) {
    case Lit::Kind::True: return tm::truth();
    case Lit::Kind::False: return tm::falsity();
    case Lit::Kind::BoolVar: return tm::var(l.bvar);
    case Lit::Kind::NegBoolVar: return tm::neg(tm::var(l.bvar));
    default: break;
  }
  // Pretty orientation: move the constant (and negative monomials) right.
  LinSum lhs = l.sum;
  Rational c = lhs.cst;
  lhs.cst = Rational(0);
  std::vector<TermPtr> left, right;
  for (const auto& [v, k] : lhs.coef) {
    Rational a = k.abs();
    TermPtr m = a == Rational(1)
                    ? tm::var(v)
                    : tm::mul({tm::constant(a), tm::var(v)});
    (k > Rational(0) ? left : right).push_back(m);
  }
  TermPtr lt_ = left.empty()
                    ? tm::constant(int64_t{0})
                    : (left.size() == 1 ? left[0] : tm::add(left));
  std::vector<TermPtr> rs = right;
  if (!c.is_zero() || rs.empty()) rs.push_back(tm::constant(-c));
  TermPtr rt = rs.size() == 1 ? rs[0] : tm::add(rs);
  switch (l.kind) {
    case Lit::Kind::Le: return tm::le(lt_, rt);
    case Lit::Kind::Lt: return tm::lt(lt_, rt);
    case Lit::Kind::Eq: return tm::eq(lt_, rt);
    case Lit::Kind::Ne: return tm::neg(tm::eq(lt_, rt));
    case Lit::Kind::Div:
      return tm::eq(tm::app(Op::Mod, {sum_to_term(l.sum, true),
                                      tm::constant(l.modulus)}),
                    tm::constant(int64_t{0}));
    case Lit::Kind::NDiv:
      return tm::neg(
          tm::eq(tm::app(Op::Mod, {sum_to_term(l.sum, true),
                                   tm::constant(l.modulus)}),
                 tm::constant(int64_t{0})));
    default: return tm::truth();
  }
}

TermPtr nf_to_term(const NF& n) {
  if (n.kind == NF::Kind::Lit) return lit_to_term(n.lit);
  std::vector<TermPtr> ks;
  ks.reserve(n.kids.size());
  for (const auto& k : n.kids) ks.push_back(nf_to_term(k));
  return n.kind == NF::Kind::And ? tm::conj(std::move(ks))
                                 : tm::disj(std::move(ks));
}

// Full pipeline: lower -> NNF (inner QE happens during conversion).
NF term_to_qf_nf(Ctx& cx, const TermPtr& t) {
  TermPtr lowered = Lowerer::lower_scope(cx, t);
  return simplify(cx, to_nf(cx, lowered, true));
}

// --- model search ----------------------------------------------------------------

// Finds a value for the single variable v in the one-free-variable formula n.
std::optional<Value> find_value(Ctx& cx, const NF& n, const std::string& v,
                                Sort sort) {
  auto eval_at = [&](const LinSum& rep) {
    NF g = simplify(cx, subst_sum(cx, n, v, rep));
    return g.is_true();
  };
  switch (sort) {
    case Sort::Bool: {
      if (simplify(cx, subst_bool(cx, n, v, true)).is_true())
        return Value::of_bool(true);
      if (simplify(cx, subst_bool(cx, n, v, false)).is_true())
        return Value::of_bool(false);
      return std::nullopt;
    }
    case Sort::Int: {
      // Candidate integers: around each boundary, shifted by the divisibility
      // period.
      int64_t period = 1;
      std::vector<Rational> bounds;
      std::function<void(const NF&)> collect = [&](const NF& m) {
        if (m.kind != NF::Kind::Lit) {
          for (const auto& k : m.kids) collect(k);
          return;
        }
        const Lit& l = m.lit;
        if (l.kind == Lit::Kind::BoolVar || l.kind == Lit::Kind::NegBoolVar)
          return;
        Rational c = l.sum.at(v);
        if (c.is_zero()) return;
        if (l.kind == Lit::Kind::Div || l.kind == Lit::Kind::NDiv) {
          period = lcm_chk(period, l.modulus);
          return;
        }
        LinSum rest = l.sum;
        rest.drop(v);
        if (!rest.ground()) return;  // shouldn't happen: single free var
        bounds.push_back((-rest.cst) / c);
      };
      collect(n);
      std::set<int64_t> cands;
      cands.insert(0);
      for (const auto& b : bounds) {
        for (int64_t d = -1; d <= 1; ++d) {
          cands.insert(b.floor() + d);
          cands.insert(b.ceil() + d);
        }
      }
      std::set<int64_t> expanded;
      for (int64_t c : cands)
        for (int64_t j = 0; j < period; ++j) {
          int64_t x;
          if (!__builtin_add_overflow(c, j, &x)) expanded.insert(x);
        }
      for (int64_t c : expanded) {
        LinSum rep;
        rep.cst = Rational(c);
        if (eval_at(rep)) return Value::of_int(Rational(c));
      }
      return std::nullopt;
    }
    case Sort::Real: {
      std::vector<Rational> bounds;
      std::function<void(const NF&)> collect = [&](const NF& m) {
        if (m.kind != NF::Kind::Lit) {
          for (const auto& k : m.kids) collect(k);
          return;
        }
        const Lit& l = m.lit;
        if (l.kind == Lit::Kind::BoolVar || l.kind == Lit::Kind::NegBoolVar)
          return;
        Rational c = l.sum.at(v);
        if (c.is_zero()) return;
        LinSum rest = l.sum;
        rest.drop(v);
        if (!rest.ground()) return;
        bounds.push_back((-rest.cst) / c);
      };
      collect(n);
      std::sort(bounds.begin(), bounds.end(),
                [](const Rational& a, const Rational& b) { return a < b; });
      std::vector<Rational> cands;
      cands.push_back(Rational(0));
      for (size_t i = 0; i < bounds.size(); ++i) {
        cands.push_back(bounds[i]);
        cands.push_back(bounds[i] - Rational(1));
        cands.push_back(bounds[i] + Rational(1));
        if (i + 1 < bounds.size())
          cands.push_back((bounds[i] + bounds[i + 1]) * Rational(1, 2));
      }
      for (const auto& c : cands) {
        LinSum rep;
        rep.cst = c;
        if (eval_at(rep)) return Value::of_real(c);
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

// --- public API --------------------------------------------------------------------

QeResult eliminate_quantifiers(const TermPtr& t, const SymTab& syms,
                               const Budget& budget) {
  Ctx cx{syms, budget, 0, 0, 0, {}};
  if (budget.expired()) return {t, false, "timeout"};
  try {
    NF nf = term_to_qf_nf(cx, t);
    TermPtr out = normalize(nf_to_term(nf));
    return {out, true, ""};
  } catch (const Bail& b) {
    return {t, false, b.what()};
  } catch (const overflow_error&) {
    return {t, false, "arithmetic overflow"};
  }
}

CheckResult check_sat(const std::vector<TermPtr>& assertions,
                      const SymTab& syms, const Budget& budget) {
  Ctx cx{syms, budget, 0, 0, 0, {}};
  CheckResult res;
  if (budget.expired()) {
    res.verdict = Verdict::Unknown;
    res.reason = "timeout";
    return res;
  }
  try {
    std::vector<TermPtr> as = assertions;
    TermPtr whole = normalize(tm::conj(std::move(as)));

    std::vector<std::pair<std::string, Sort>> vars;
    {
      std::set<std::string> used;
      for (const auto& fv : free_vars(whole)) used.insert(fv.name);
      for (const auto& [name, sort] : syms)
        if (used.count(name)) vars.push_back({name, sort});
    }

    // chain[i] = QE(exists vars[i..]. matrix); chain[0] is ground, and
    // chain[i] mentions only vars[0..i-1].
    std::vector<NF> chain(vars.size() + 1, NF::t());
    chain[vars.size()] = term_to_qf_nf(cx, whole);
    for (size_t i = vars.size(); i-- > 0;)
      chain[i] = qe_nf(cx, chain[i + 1], {vars[i]}, /*exists=*/true);

    if (chain[0].is_false()) {
      res.verdict = Verdict::Unsat;
      return res;
    }
    if (!chain[0].is_true()) {
      res.verdict = Verdict::Unknown;
      res.reason = "quantifier elimination left residue";
      return res;
    }

    // Model construction left to right: chain[i+1] under the values fixed so
    // far is a one-variable formula in vars[i].
    for (size_t i = 0; i < vars.size(); ++i) {
      NF one = chain[i + 1];
      for (size_t j = 0; j < i; ++j) {
        const Value& val = res.model[vars[j].first];
        if (vars[j].second == Sort::Bool) {
          one = subst_bool(cx, one, vars[j].first, val.b);
        } else {
          LinSum rep;
          rep.cst = val.r;
          one = subst_sum(cx, one, vars[j].first, rep);
        }
      }
      one = simplify(cx, std::move(one));
      auto val = find_value(cx, one, vars[i].first, vars[i].second);
      if (!val) {
        res.verdict = Verdict::Unknown;
        res.reason = "model construction failed for " + vars[i].first;
        return res;
      }
      res.model[vars[i].first] = *val;
    }
    res.verdict = Verdict::Sat;
    return res;
  } catch (const Bail& b) {
    res.verdict = Verdict::Unknown;
    res.reason = b.what();
    return res;
  } catch (const overflow_error&) {
    res.verdict = Verdict::Unknown;
    res.reason = "arithmetic overflow";
    return res;
  }
}

}  // namespace issy::smtcore
