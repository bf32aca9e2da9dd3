#include "issy/terms.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace issy {

std::string to_string(Sort s) {
  switch (s) {
    case Sort::Bool: return "Bool";
    case Sort::Int: return "Int";
    case Sort::Real: return "Real";
  }
  return "?";
}

void VarEnv::declare(const std::string& name, VarKind kind, Sort sort) {
  if (index_.count(name))
    throw std::invalid_argument("duplicate variable: " + name);
  index_[name] = entries_.size();
  entries_.push_back({name, kind, sort});
}

const VarEnv::Entry* VarEnv::lookup(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::vector<VarEnv::Entry> VarEnv::inputs() const {
  std::vector<Entry> out;
  for (const auto& e : entries_)
    if (e.kind == VarKind::Input) out.push_back(e);
  return out;
}

std::vector<VarEnv::Entry> VarEnv::states() const {
  std::vector<Entry> out;
  for (const auto& e : entries_)
    if (e.kind == VarKind::State) out.push_back(e);
  return out;
}

bool VarEnv::operator==(const VarEnv& o) const {
  if (entries_.size() != o.entries_.size()) return false;
  for (size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = o.entries_[i];
    if (a.name != b.name || a.kind != b.kind || a.sort != b.sort) return false;
  }
  return true;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Not: return "not";
    case Op::Implies: return "=>";
    case Op::Ite: return "ite";
    case Op::Distinct: return "distinct";
    case Op::Eq: return "=";
    case Op::Lt: return "<";
    case Op::Gt: return ">";
    case Op::Le: return "<=";
    case Op::Ge: return ">=";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Mod: return "mod";
    case Op::Abs: return "abs";
    case Op::ToReal: return "to_real";
  }
  return "?";
}

namespace tm {

TermPtr constant(const Rational& r) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::Const;
  t->value = r;
  return t;
}

TermPtr constant(int64_t n) { return constant(Rational(n)); }

TermPtr boolean(bool b) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::BoolConst;
  t->bval = b;
  return t;
}

TermPtr truth() { return boolean(true); }
TermPtr falsity() { return boolean(false); }

TermPtr var(const std::string& name, bool primed) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::Var;
  t->var = name;
  t->primed = primed;
  return t;
}

TermPtr app(Op op, std::vector<TermPtr> args) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::App;
  t->op = op;
  t->args = std::move(args);
  return t;
}

TermPtr conj(std::vector<TermPtr> args) {
  if (args.empty()) return truth();
  if (args.size() == 1) return args[0];
  return app(Op::And, std::move(args));
}

TermPtr disj(std::vector<TermPtr> args) {
  if (args.empty()) return falsity();
  if (args.size() == 1) return args[0];
  return app(Op::Or, std::move(args));
}

TermPtr neg(TermPtr a) { return app(Op::Not, {std::move(a)}); }
TermPtr implies(TermPtr a, TermPtr b) {
  return app(Op::Implies, {std::move(a), std::move(b)});
}
TermPtr ite(TermPtr c, TermPtr a, TermPtr b) {
  return app(Op::Ite, {std::move(c), std::move(a), std::move(b)});
}
TermPtr eq(TermPtr a, TermPtr b) { return app(Op::Eq, {std::move(a), std::move(b)}); }
TermPtr le(TermPtr a, TermPtr b) { return app(Op::Le, {std::move(a), std::move(b)}); }
TermPtr lt(TermPtr a, TermPtr b) { return app(Op::Lt, {std::move(a), std::move(b)}); }
TermPtr ge(TermPtr a, TermPtr b) { return app(Op::Ge, {std::move(a), std::move(b)}); }
TermPtr gt(TermPtr a, TermPtr b) { return app(Op::Gt, {std::move(a), std::move(b)}); }
TermPtr add(std::vector<TermPtr> args) { return app(Op::Add, std::move(args)); }
TermPtr sub(TermPtr a, TermPtr b) { return app(Op::Sub, {std::move(a), std::move(b)}); }
TermPtr minus(TermPtr a) { return app(Op::Sub, {std::move(a)}); }
TermPtr mul(std::vector<TermPtr> args) { return app(Op::Mul, std::move(args)); }

static TermPtr quantified(Quantifier q,
                          std::vector<std::pair<std::string, Sort>> bound,
                          TermPtr body) {
  if (bound.empty()) return body;
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::Quant;
  t->quant = q;
  t->bound = std::move(bound);
  t->body = std::move(body);
  return t;
}

TermPtr forall(std::vector<std::pair<std::string, Sort>> bound, TermPtr body) {
  return quantified(Quantifier::Forall, std::move(bound), std::move(body));
}
TermPtr exists(std::vector<std::pair<std::string, Sort>> bound, TermPtr body) {
  return quantified(Quantifier::Exists, std::move(bound), std::move(body));
}

}  // namespace tm

bool structural_equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case Term::Kind::Const: return a->value == b->value;
    case Term::Kind::BoolConst: return a->bval == b->bval;
    case Term::Kind::Var: return a->var == b->var && a->primed == b->primed;
    case Term::Kind::App: {
      if (a->op != b->op || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!structural_equal(a->args[i], b->args[i])) return false;
      return true;
    }
    case Term::Kind::Quant: {
      if (a->quant != b->quant || a->bound != b->bound) return false;
      return structural_equal(a->body, b->body);
    }
  }
  return false;
}

size_t term_hash(const TermPtr& t) {
  auto mix = [](size_t h, size_t v) {
    return h * 1099511628211ull ^ v;
  };
  if (!t) return 0;
  size_t h = static_cast<size_t>(t->kind) + 0x9e3779b9;
  switch (t->kind) {
    case Term::Kind::Const:
      h = mix(h, std::hash<int64_t>{}(t->value.num()));
      h = mix(h, std::hash<int64_t>{}(t->value.den()));
      break;
    case Term::Kind::BoolConst:
      h = mix(h, t->bval ? 7 : 3);
      break;
    case Term::Kind::Var:
      h = mix(h, std::hash<std::string>{}(t->var));
      h = mix(h, t->primed ? 5 : 2);
      break;
    case Term::Kind::App:
      h = mix(h, static_cast<size_t>(t->op));
      for (const auto& a : t->args) h = mix(h, term_hash(a));
      break;
    case Term::Kind::Quant:
      h = mix(h, static_cast<size_t>(t->quant));
      for (const auto& [n, s] : t->bound) {
        h = mix(h, std::hash<std::string>{}(n));
        h = mix(h, static_cast<size_t>(s));
      }
      h = mix(h, term_hash(t->body));
      break;
  }
  return h;
}

size_t term_size(const TermPtr& t) {
  if (!t) return 0;
  size_t n = 1;
  if (t->kind == Term::Kind::App)
    for (const auto& a : t->args) n += term_size(a);
  if (t->kind == Term::Kind::Quant) n += term_size(t->body);
  return n;
}

std::string term_to_string(const TermPtr& t) {
  if (!t) return "<null>";
  std::ostringstream os;
  switch (t->kind) {
    case Term::Kind::Const:
      if (t->value.is_integer()) {
        os << t->value.num();
      } else {
        os << "(/ " << t->value.num() << " " << t->value.den() << ")";
      }
      break;
    case Term::Kind::BoolConst:
      os << (t->bval ? "true" : "false");
      break;
    case Term::Kind::Var:
      os << t->var << (t->primed ? "~" : "");
      break;
    case Term::Kind::App: {
      os << "(" << op_name(t->op);
      for (const auto& a : t->args) os << " " << term_to_string(a);
      os << ")";
      break;
    }
    case Term::Kind::Quant: {
      os << "(" << (t->quant == Quantifier::Forall ? "forall" : "exists")
         << " (";
      for (size_t i = 0; i < t->bound.size(); ++i) {
        if (i) os << " ";
        os << "(" << t->bound[i].first << " " << to_string(t->bound[i].second)
           << ")";
      }
      os << ") " << term_to_string(t->body) << ")";
      break;
    }
  }
  return os.str();
}

// --- typing -----------------------------------------------------------------

namespace {

struct TypeChecker {
  const VarEnv& env;
  // Bound variables shadow env entries.
  std::vector<std::pair<std::string, Sort>> scope;

  // `floating` marks pure integer numerals, which may promote to Real by
  // context (D1); in ambiguous contexts they stay Int.
  struct R {
    Sort sort;
    bool floating;
  };

  R check(const TermPtr& t) {
    switch (t->kind) {
      case Term::Kind::Const:
        return {t->value.is_integer() ? Sort::Int : Sort::Real,
                t->value.is_integer()};
      case Term::Kind::BoolConst:
        return {Sort::Bool, false};
      case Term::Kind::Var: {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
          if (it->first == t->var) {
            if (t->primed)
              throw SortError(t->var, "bound variables cannot be primed");
            return {it->second, false};
          }
        const auto* e = env.lookup(t->var);
        if (!e) throw UnknownVariable(t->var);
        if (t->primed && e->kind == VarKind::Input) throw PrimedInput(t->var);
        return {e->sort, false};
      }
      case Term::Kind::Quant: {
        size_t base = scope.size();
        for (const auto& b : t->bound) scope.push_back(b);
        R r = check(t->body);
        scope.resize(base);
        if (r.sort != Sort::Bool)
          throw SortError("quantifier", "body must be Bool");
        return {Sort::Bool, false};
      }
      case Term::Kind::App:
        return check_app(t);
    }
    throw SortError("?", "unreachable");
  }

  R check_app(const TermPtr& t) {
    const auto& as = t->args;
    std::string where = op_name(t->op);
    auto arity = [&](size_t lo, size_t hi) {
      if (as.size() < lo || (hi > 0 && as.size() > hi))
        throw SortError(where, "wrong arity");
    };
    switch (t->op) {
      case Op::And:
      case Op::Or:
      case Op::Implies: {
        if (t->op == Op::Implies) arity(2, 0);
        for (const auto& a : as)
          if (check(a).sort != Sort::Bool)
            throw SortError(where, "expected Bool operand");
        return {Sort::Bool, false};
      }
      case Op::Not: {
        arity(1, 1);
        if (check(as[0]).sort != Sort::Bool)
          throw SortError(where, "expected Bool operand");
        return {Sort::Bool, false};
      }
      case Op::Ite: {
        arity(3, 3);
        if (check(as[0]).sort != Sort::Bool)
          throw SortError(where, "condition must be Bool");
        std::vector<R> rs = {check(as[1]), check(as[2])};
        return unify(rs, where, /*allow_bool=*/true);
      }
      case Op::Eq:
      case Op::Distinct: {
        arity(2, 0);
        std::vector<R> rs;
        for (const auto& a : as) rs.push_back(check(a));
        unify(rs, where, /*allow_bool=*/true);
        return {Sort::Bool, false};
      }
      case Op::Lt:
      case Op::Gt:
      case Op::Le:
      case Op::Ge: {
        arity(2, 0);
        std::vector<R> rs;
        for (const auto& a : as) rs.push_back(check(a));
        unify(rs, where, /*allow_bool=*/false);
        return {Sort::Bool, false};
      }
      case Op::Add:
      case Op::Mul:
      case Op::Sub: {
        arity(1, 0);
        std::vector<R> rs;
        for (const auto& a : as) rs.push_back(check(a));
        return unify(rs, where, /*allow_bool=*/false);
      }
      case Op::Div: {
        arity(2, 2);
        R a = check(as[0]);
        R b = check(as[1]);
        if (a.sort == Sort::Bool || b.sort == Sort::Bool)
          throw SortError(where, "expected numeric operands");
        // Real division only (D3); a nonzero constant divisor keeps the term
        // inside the linear fragment.
        if (!as[1]->is_const() || as[1]->value.is_zero())
          throw SortError(where, "divisor must be a nonzero numeric constant");
        if (a.sort == Sort::Int && !a.floating)
          throw SortError(where, "/ requires Real operands");
        return {Sort::Real, false};
      }
      case Op::Mod: {
        arity(2, 2);
        R a = check(as[0]);
        R b = check(as[1]);
        if (a.sort != Sort::Int || b.sort != Sort::Int)
          throw SortError(where, "mod requires Int operands");
        return {Sort::Int, false};
      }
      case Op::Abs: {
        arity(1, 1);
        R a = check(as[0]);
        if (a.sort == Sort::Bool) throw SortError(where, "expected numeric");
        return a;
      }
      case Op::ToReal: {
        arity(1, 1);
        R a = check(as[0]);
        if (a.sort != Sort::Int)
          throw SortError(where, "to_real expects Int");
        return {Sort::Real, false};
      }
    }
    throw SortError(where, "unreachable");
  }

  R unify(const std::vector<R>& rs, const std::string& where,
          bool allow_bool) {
    bool any_bool = false, any_real = false, any_hard_int = false;
    bool all_floating = true;
    for (const auto& r : rs) {
      any_bool = any_bool || r.sort == Sort::Bool;
      any_real = any_real || r.sort == Sort::Real;
      any_hard_int = any_hard_int || (r.sort == Sort::Int && !r.floating);
      all_floating = all_floating && r.floating;
    }
    if (any_bool) {
      if (!allow_bool) throw SortError(where, "Bool in numeric position");
      for (const auto& r : rs)
        if (r.sort != Sort::Bool)
          throw SortError(where, "Bool mixed with numeric");
      return {Sort::Bool, false};
    }
    if (any_real && any_hard_int)
      throw SortError(where, "Int/Real mix (use to_real)");
    if (any_real) return {Sort::Real, false};
    return {Sort::Int, all_floating};
  }
};

}  // namespace

Sort typecheck(const TermPtr& t, const VarEnv& env) {
  TypeChecker tc{env, {}};
  return tc.check(t).sort;
}

// --- structure --------------------------------------------------------------

namespace {
void collect_free(const TermPtr& t, std::set<std::string>& bound,
                  std::set<VarRef>& out) {
  switch (t->kind) {
    case Term::Kind::Const:
    case Term::Kind::BoolConst:
      return;
    case Term::Kind::Var:
      if (!bound.count(t->var)) out.insert({t->var, t->primed});
      return;
    case Term::Kind::App:
      for (const auto& a : t->args) collect_free(a, bound, out);
      return;
    case Term::Kind::Quant: {
      std::vector<std::string> added;
      for (const auto& [n, s] : t->bound)
        if (bound.insert(n).second) added.push_back(n);
      collect_free(t->body, bound, out);
      for (const auto& n : added) bound.erase(n);
      return;
    }
  }
}
}  // namespace

std::vector<VarRef> free_vars(const TermPtr& t) {
  std::set<std::string> bound;
  std::set<VarRef> out;
  collect_free(t, bound, out);
  return {out.begin(), out.end()};
}

bool mentions_primed(const TermPtr& t) {
  for (const auto& v : free_vars(t))
    if (v.primed) return true;
  return false;
}

bool mentions_input(const TermPtr& t, const VarEnv& env) {
  for (const auto& v : free_vars(t)) {
    const auto* e = env.lookup(v.name);
    if (e && e->kind == VarKind::Input) return true;
  }
  return false;
}

bool mentions_var(const TermPtr& t, const VarRef& v) {
  for (const auto& f : free_vars(t))
    if (f == v) return true;
  return false;
}

bool has_quantifier(const TermPtr& t) {
  if (t->kind == Term::Kind::Quant) return true;
  if (t->kind == Term::Kind::App)
    for (const auto& a : t->args)
      if (has_quantifier(a)) return true;
  return false;
}

TermPtr substitute(const TermPtr& t, const std::map<VarRef, TermPtr>& mapping) {
  switch (t->kind) {
    case Term::Kind::Const:
    case Term::Kind::BoolConst:
      return t;
    case Term::Kind::Var: {
      auto it = mapping.find({t->var, t->primed});
      return it == mapping.end() ? t : it->second;
    }
    case Term::Kind::App: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      bool changed = false;
      for (const auto& a : t->args) {
        auto na = substitute(a, mapping);
        changed = changed || na.get() != a.get();
        args.push_back(std::move(na));
      }
      return changed ? tm::app(t->op, std::move(args)) : t;
    }
    case Term::Kind::Quant: {
      // Bound names shadow: drop shadowed entries.
      std::map<VarRef, TermPtr> inner = mapping;
      for (const auto& [n, s] : t->bound) {
        inner.erase({n, false});
        inner.erase({n, true});
      }
      // Capture avoidance: alpha-rename binders that appear free in any
      // replacement.
      std::set<std::string> clashing;
      for (const auto& [ref, rep] : inner)
        for (const auto& fv : free_vars(rep))
          for (const auto& [n, s] : t->bound)
            if (fv.name == n) clashing.insert(n);
      std::vector<std::pair<std::string, Sort>> bound = t->bound;
      TermPtr body = t->body;
      if (!clashing.empty()) {
        std::map<VarRef, TermPtr> rename;
        std::set<std::string> taken;
        for (const auto& [n, s] : bound) taken.insert(n);
        for (auto& [n, s] : bound) {
          if (!clashing.count(n)) continue;
          std::string fresh = n;
          int k = 1;
          do {
            fresh = n + "_r" + std::to_string(k++);
          } while (taken.count(fresh));
          taken.insert(fresh);
          rename[{n, false}] = tm::var(fresh);
          n = fresh;
        }
        body = substitute(body, rename);
      }
      auto nb = substitute(body, inner);
      if (nb.get() == t->body.get() && clashing.empty()) return t;
      auto q = std::make_shared<Term>(*t);
      q->bound = std::move(bound);
      q->body = nb;
      return q;
    }
  }
  return t;
}

TermPtr apply_priming(const TermPtr& t, PrimeDirection dir, const VarEnv& env) {
  switch (t->kind) {
    case Term::Kind::Const:
    case Term::Kind::BoolConst:
      return t;
    case Term::Kind::Var: {
      const auto* e = env.lookup(t->var);
      if (!e) {
        // Bound solver variables pass through untouched.
        return t;
      }
      if (e->kind == VarKind::Input) {
        if (dir == PrimeDirection::PrimeAll && t->primed)
          throw PrimedInput(t->var);
        return t;
      }
      bool target = dir == PrimeDirection::PrimeAll;
      if (t->primed == target) return t;
      return tm::var(t->var, target);
    }
    case Term::Kind::App: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) args.push_back(apply_priming(a, dir, env));
      return tm::app(t->op, std::move(args));
    }
    case Term::Kind::Quant: {
      auto q = std::make_shared<Term>(*t);
      q->body = apply_priming(t->body, dir, env);
      return q;
    }
  }
  return t;
}

// --- normalize ----------------------------------------------------------------

namespace {

std::optional<Rational> const_value(const TermPtr& t) {
  if (t->is_const()) return t->value;
  return std::nullopt;
}

// Recognizes `coef * var + rest-constant <= / < / = ...` single-variable
// bounds used by the subsumption pass: (op var const) or (op const var).
struct SimpleBound {
  Op op;
  VarRef v;
  Rational c;  // bound on v after orientation: v op c
};

std::optional<SimpleBound> simple_bound(const TermPtr& t) {
  if (t->kind != Term::Kind::App || t->args.size() != 2) return std::nullopt;
  Op op = t->op;
  if (op != Op::Le && op != Op::Lt && op != Op::Ge && op != Op::Gt)
    return std::nullopt;
  const auto& a = t->args[0];
  const auto& b = t->args[1];
  if (a->is_var() && b->is_const())
    return SimpleBound{op, {a->var, a->primed}, b->value};
  if (a->is_const() && b->is_var()) {
    // c op v  ==  v op' c with the comparison flipped
    Op flipped = op == Op::Le   ? Op::Ge
                 : op == Op::Lt ? Op::Gt
                 : op == Op::Ge ? Op::Le
                                : Op::Lt;
    return SimpleBound{flipped, {b->var, b->primed}, a->value};
  }
  return std::nullopt;
}

// True when bound x subsumes bound y in a conjunction (x implies y).
bool conj_subsumes(const SimpleBound& x, const SimpleBound& y) {
  if (x.v != y.v) return false;
  auto upper = [](Op o) { return o == Op::Le || o == Op::Lt; };
  if (upper(x.op) != upper(y.op)) return false;
  if (upper(x.op)) {
    // v <(=) xc implies v <(=) yc when xc < yc, or equal with x at least
    // as strict.
    if (x.c < y.c) return true;
    if (x.c == y.c) return !(x.op == Op::Le && y.op == Op::Lt);
    return false;
  }
  if (x.c > y.c) return true;
  if (x.c == y.c) return !(x.op == Op::Ge && y.op == Op::Gt);
  return false;
}

}  // namespace

TermPtr normalize(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Const:
    case Term::Kind::BoolConst:
    case Term::Kind::Var:
      return t;
    case Term::Kind::Quant: {
      auto body = normalize(t->body);
      if (body->kind == Term::Kind::BoolConst) return body;
      // Drop vacuous binders.
      std::vector<std::pair<std::string, Sort>> kept;
      for (const auto& b : t->bound)
        if (mentions_var(body, {b.first, false})) kept.push_back(b);
      if (kept.empty()) return body;
      return t->quant == Quantifier::Forall ? tm::forall(kept, body)
                                            : tm::exists(kept, body);
    }
    case Term::Kind::App:
      break;
  }

  std::vector<TermPtr> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) args.push_back(normalize(a));

  switch (t->op) {
    case Op::Not: {
      const auto& a = args[0];
      if (a->is_true()) return tm::falsity();
      if (a->is_false()) return tm::truth();
      if (a->is_app(Op::Not)) return a->args[0];
      return tm::neg(a);
    }
    case Op::And:
    case Op::Or: {
      bool is_and = t->op == Op::And;
      std::vector<TermPtr> flat;
      for (const auto& a : args) {
        if (is_and ? a->is_true() : a->is_false()) continue;
        if (is_and ? a->is_false() : a->is_true())
          return is_and ? tm::falsity() : tm::truth();
        if (a->is_app(t->op)) {
          for (const auto& inner : a->args) flat.push_back(inner);
        } else {
          flat.push_back(a);
        }
      }
      // Dedupe and bound-subsume.
      std::vector<TermPtr> kept;
      for (const auto& a : flat) {
        bool drop = false;
        for (auto& k : kept) {
          if (structural_equal(a, k)) {
            drop = true;
            break;
          }
          auto ba = simple_bound(a);
          auto bk = simple_bound(k);
          if (ba && bk) {
            // In a conjunction the stricter bound wins; in a disjunction the
            // weaker one.
            bool a_wins = is_and ? conj_subsumes(*ba, *bk)
                                 : conj_subsumes(*bk, *ba);
            bool k_wins = is_and ? conj_subsumes(*bk, *ba)
                                 : conj_subsumes(*ba, *bk);
            if (k_wins) {
              drop = true;
              break;
            }
            if (a_wins) {
              k = a;
              drop = true;
              break;
            }
          }
        }
        if (!drop) kept.push_back(a);
      }
      if (kept.empty()) return is_and ? tm::truth() : tm::falsity();
      if (kept.size() == 1) return kept[0];
      return tm::app(t->op, std::move(kept));
    }
    case Op::Implies: {
      // Right-fold n-ary implication, then simplify the binary case.
      TermPtr acc = args.back();
      for (size_t i = args.size() - 1; i-- > 0;) {
        const auto& a = args[i];
        if (a->is_true()) continue;
        if (a->is_false()) return tm::truth();
        if (acc->is_true()) return tm::truth();
        if (acc->is_false())
          acc = normalize(tm::neg(a));
        else
          acc = tm::implies(a, acc);
      }
      return acc;
    }
    case Op::Ite: {
      if (args[0]->is_true()) return args[1];
      if (args[0]->is_false()) return args[2];
      if (structural_equal(args[1], args[2])) return args[1];
      return tm::app(Op::Ite, std::move(args));
    }
    case Op::Add:
    case Op::Mul: {
      bool is_add = t->op == Op::Add;
      std::vector<TermPtr> flat;
      Rational acc = is_add ? Rational(0) : Rational(1);
      for (const auto& a : args) {
        if (a->is_app(t->op)) {
          for (const auto& inner : a->args) {
            if (auto c = const_value(inner))
              acc = is_add ? acc + *c : acc * *c;
            else
              flat.push_back(inner);
          }
        } else if (auto c = const_value(a)) {
          acc = is_add ? acc + *c : acc * *c;
        } else {
          flat.push_back(a);
        }
      }
      if (!is_add && acc.is_zero()) return tm::constant(Rational(0));
      bool unit = is_add ? acc.is_zero() : acc == Rational(1);
      if (flat.empty()) return tm::constant(acc);
      if (!unit) flat.insert(is_add ? flat.end() : flat.begin(),
                             tm::constant(acc));
      if (flat.size() == 1) return flat[0];
      return tm::app(t->op, std::move(flat));
    }
    case Op::Sub: {
      if (args.size() == 1) {
        if (auto c = const_value(args[0])) return tm::constant(-*c);
        return tm::app(Op::Sub, std::move(args));
      }
      bool all_const = true;
      for (const auto& a : args)
        if (!a->is_const()) all_const = false;
      if (all_const) {
        Rational acc = args[0]->value;
        for (size_t i = 1; i < args.size(); ++i) acc = acc - args[i]->value;
        return tm::constant(acc);
      }
      // x - 0 == x
      if (args.size() == 2 && args[1]->is_const() && args[1]->value.is_zero())
        return args[0];
      return tm::app(Op::Sub, std::move(args));
    }
    case Op::Div: {
      if (args[0]->is_const() && args[1]->is_const() &&
          !args[1]->value.is_zero())
        return tm::constant(args[0]->value / args[1]->value);
      return tm::app(Op::Div, std::move(args));
    }
    case Op::Mod: {
      if (args[0]->is_const() && args[1]->is_const() &&
          args[0]->value.is_integer() && args[1]->value.is_integer() &&
          !args[1]->value.is_zero())
        return tm::constant(
            Rational::euclid_mod(args[0]->value.num(), args[1]->value.num()));
      return tm::app(Op::Mod, std::move(args));
    }
    case Op::Abs: {
      if (auto c = const_value(args[0])) return tm::constant(c->abs());
      return tm::app(Op::Abs, std::move(args));
    }
    case Op::ToReal: {
      if (args[0]->is_const()) return args[0];
      return tm::app(Op::ToReal, std::move(args));
    }
    case Op::Eq:
    case Op::Le:
    case Op::Lt:
    case Op::Ge:
    case Op::Gt: {
      if (args.size() == 2 && args[0]->is_const() && args[1]->is_const()) {
        const Rational& a = args[0]->value;
        const Rational& b = args[1]->value;
        bool r = false;
        switch (t->op) {
          case Op::Eq: r = a == b; break;
          case Op::Le: r = a <= b; break;
          case Op::Lt: r = a < b; break;
          case Op::Ge: r = a >= b; break;
          case Op::Gt: r = a > b; break;
          default: break;
        }
        return tm::boolean(r);
      }
      if (t->op == Op::Eq && args.size() == 2 &&
          structural_equal(args[0], args[1]))
        return tm::truth();
      return tm::app(t->op, std::move(args));
    }
    case Op::Distinct:
      return tm::app(Op::Distinct, std::move(args));
  }
  return tm::app(t->op, std::move(args));
}

// --- evaluation ---------------------------------------------------------------

Value eval_term(const TermPtr& t, const Valuation& v) {
  switch (t->kind) {
    case Term::Kind::Const:
      return t->value.is_integer() ? Value::of_int(t->value)
                                   : Value::of_real(t->value);
    case Term::Kind::BoolConst:
      return Value::of_bool(t->bval);
    case Term::Kind::Var: {
      auto it = v.find({t->var, t->primed});
      if (it == v.end())
        throw std::runtime_error("eval: unbound variable " + t->var +
                                 (t->primed ? "'" : ""));
      return it->second;
    }
    case Term::Kind::Quant:
      throw std::runtime_error("eval: cannot evaluate quantifier");
    case Term::Kind::App:
      break;
  }

  const auto& as = t->args;
  auto num = [&](const TermPtr& a) {
    Value x = eval_term(a, v);
    if (x.sort == Sort::Bool) throw std::runtime_error("eval: expected number");
    return x.r;
  };
  auto boolean = [&](const TermPtr& a) {
    Value x = eval_term(a, v);
    if (x.sort != Sort::Bool) throw std::runtime_error("eval: expected Bool");
    return x.b;
  };

  switch (t->op) {
    case Op::And: {
      for (const auto& a : as)
        if (!boolean(a)) return Value::of_bool(false);
      return Value::of_bool(true);
    }
    case Op::Or: {
      for (const auto& a : as)
        if (boolean(a)) return Value::of_bool(true);
      return Value::of_bool(false);
    }
    case Op::Not:
      return Value::of_bool(!boolean(as[0]));
    case Op::Implies: {
      // Right associative n-ary implication.
      bool acc = boolean(as.back());
      for (size_t i = as.size() - 1; i-- > 0;) acc = !boolean(as[i]) || acc;
      return Value::of_bool(acc);
    }
    case Op::Ite:
      return boolean(as[0]) ? eval_term(as[1], v) : eval_term(as[2], v);
    case Op::Eq: {
      Value first = eval_term(as[0], v);
      for (size_t i = 1; i < as.size(); ++i)
        if (!(eval_term(as[i], v) == first)) return Value::of_bool(false);
      return Value::of_bool(true);
    }
    case Op::Distinct: {
      std::vector<Value> vals;
      for (const auto& a : as) vals.push_back(eval_term(a, v));
      for (size_t i = 0; i < vals.size(); ++i)
        for (size_t j = i + 1; j < vals.size(); ++j)
          if (vals[i] == vals[j]) return Value::of_bool(false);
      return Value::of_bool(true);
    }
    case Op::Lt:
    case Op::Gt:
    case Op::Le:
    case Op::Ge: {
      for (size_t i = 0; i + 1 < as.size(); ++i) {
        Rational a = num(as[i]);
        Rational b = num(as[i + 1]);
        bool ok = t->op == Op::Lt   ? a < b
                  : t->op == Op::Gt ? a > b
                  : t->op == Op::Le ? a <= b
                                    : a >= b;
        if (!ok) return Value::of_bool(false);
      }
      return Value::of_bool(true);
    }
    case Op::Add: {
      Rational acc(0);
      for (const auto& a : as) acc = acc + num(a);
      return Value::of_real(acc);
    }
    case Op::Sub: {
      if (as.size() == 1) return Value::of_real(-num(as[0]));
      Rational acc = num(as[0]);
      for (size_t i = 1; i < as.size(); ++i) acc = acc - num(as[i]);
      return Value::of_real(acc);
    }
    case Op::Mul: {
      Rational acc(1);
      for (const auto& a : as) acc = acc * num(a);
      return Value::of_real(acc);
    }
    case Op::Div:
      return Value::of_real(num(as[0]) / num(as[1]));
    case Op::Mod: {
      Rational a = num(as[0]);
      Rational b = num(as[1]);
      if (!a.is_integer() || !b.is_integer())
        throw std::runtime_error("eval: mod on non-integers");
      return Value::of_int(Rational(Rational::euclid_mod(a.num(), b.num())));
    }
    case Op::Abs:
      return Value::of_real(num(as[0]).abs());
    case Op::ToReal:
      return Value::of_real(num(as[0]));
  }
  throw std::runtime_error("eval: unreachable");
}

// --- SMT-LIB2 ------------------------------------------------------------------

std::string smt2_var_name(const std::string& name, bool primed) {
  return primed ? name + kSmtPrimeSuffix : name;
}

namespace {
void serialize_rec(const TermPtr& t, std::ostringstream& os) {
  switch (t->kind) {
    case Term::Kind::Const: {
      const Rational& r = t->value;
      if (r.is_integer()) {
        if (r.num() < 0)
          os << "(- " << -r.num() << ")";
        else
          os << r.num();
      } else {
        if (r.num() < 0)
          os << "(- (/ " << -r.num() << " " << r.den() << "))";
        else
          os << "(/ " << r.num() << " " << r.den() << ")";
      }
      return;
    }
    case Term::Kind::BoolConst:
      os << (t->bval ? "true" : "false");
      return;
    case Term::Kind::Var:
      os << smt2_var_name(t->var, t->primed);
      return;
    case Term::Kind::App: {
      os << "(" << op_name(t->op);
      for (const auto& a : t->args) {
        os << " ";
        serialize_rec(a, os);
      }
      os << ")";
      return;
    }
    case Term::Kind::Quant: {
      os << "(" << (t->quant == Quantifier::Forall ? "forall" : "exists")
         << " (";
      for (size_t i = 0; i < t->bound.size(); ++i) {
        if (i) os << " ";
        os << "(" << t->bound[i].first << " " << to_string(t->bound[i].second)
           << ")";
      }
      os << ") ";
      serialize_rec(t->body, os);
      os << ")";
      return;
    }
  }
}
}  // namespace

std::string serialize_smt2(const TermPtr& t) {
  std::ostringstream os;
  serialize_rec(t, os);
  return os.str();
}

}  // namespace issy
