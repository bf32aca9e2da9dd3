#include "issy/llissy.hpp"

#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "issy/frontend.hpp"
#include "issy/sexpr.hpp"

namespace issy::llissy {

namespace {

// --- emission ----------------------------------------------------------------

// Rationals render as NAT, a finite decimal, or the division operator form;
// negatives through unary minus. Keeps constants inside the <CONSTS>/<TERM>
// grammar.
void emit_rational(const Rational& r, std::ostringstream& os) {
  if (r.is_negative()) {
    os << "(- ";
    emit_rational(-r, os);
    os << ")";
    return;
  }
  if (r.is_integer()) {
    os << r.num();
    return;
  }
  // finite decimal iff den = 2^a * 5^b
  int64_t den = r.den();
  int a = 0, b = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++a;
  }
  while (den % 5 == 0) {
    den /= 5;
    ++b;
  }
  if (den == 1 && a <= 18 && b <= 18) {
    int k = a > b ? a : b;
    int64_t scale = 1;
    for (int i = 0; i < k; ++i) scale *= 10;
    int64_t scaled = r.num() * (scale / r.den());
    std::string digits = std::to_string(scaled);
    while (static_cast<int>(digits.size()) <= k)
      digits.insert(digits.begin(), '0');
    digits.insert(digits.end() - k, '.');
    os << digits;
    return;
  }
  os << "(/ " << r.num() << " " << r.den() << ")";
}

void emit_term(const TermPtr& t, std::ostringstream& os) {
  switch (t->kind) {
    case Term::Kind::Const:
      emit_rational(t->value, os);
      return;
    case Term::Kind::BoolConst:
      os << (t->bval ? "true" : "false");
      return;
    case Term::Kind::Var:
      os << t->var << (t->primed ? "~" : "");
      return;
    case Term::Kind::App: {
      os << "(" << op_name(t->op);
      for (const auto& a : t->args) {
        os << " ";
        emit_term(a, os);
      }
      os << ")";
      return;
    }
    case Term::Kind::Quant:
      throw std::invalid_argument(
          "quantified terms cannot be emitted to LLissy");
  }
}

// RP-LTL in the <FORMULA> grammar: implication and iff are lowered (D12).
void emit_formula(const RpltlPtr& f, std::ostringstream& os) {
  switch (f->op) {
    case LtlOp::Atom:
      os << "(ap ";
      emit_term(f->atom, os);
      os << ")";
      return;
    case LtlOp::Not:
    case LtlOp::Next:
    case LtlOp::Eventually:
    case LtlOp::Globally: {
      const char* op = f->op == LtlOp::Not          ? "not"
                       : f->op == LtlOp::Next       ? "X"
                       : f->op == LtlOp::Eventually ? "F"
                                                    : "G";
      os << "(" << op << " ";
      emit_formula(f->kids[0], os);
      os << ")";
      return;
    }
    case LtlOp::And:
    case LtlOp::Or: {
      os << "(" << (f->op == LtlOp::And ? "and" : "or");
      for (const auto& k : f->kids) {
        os << " ";
        emit_formula(k, os);
      }
      os << ")";
      return;
    }
    case LtlOp::Implies: {
      RpltlPtr lowered =
          lt::disj({lt::neg(f->kids[0]), f->kids[1]});
      emit_formula(lowered, os);
      return;
    }
    case LtlOp::Iff: {
      RpltlPtr lowered = lt::conj(
          {lt::disj({lt::neg(f->kids[0]), f->kids[1]}),
           lt::disj({lt::neg(f->kids[1]), f->kids[0]})});
      emit_formula(lowered, os);
      return;
    }
    case LtlOp::Until:
    case LtlOp::WeakUntil:
    case LtlOp::Release: {
      const char* op = f->op == LtlOp::Until      ? "U"
                       : f->op == LtlOp::WeakUntil ? "W"
                                                   : "R";
      os << "(" << op << " ";
      emit_formula(f->kids[0], os);
      os << " ";
      emit_formula(f->kids[1], os);
      os << ")";
      return;
    }
  }
}

void emit_list(const std::vector<std::string>& elems, std::ostringstream& os) {
  if (elems.empty()) {
    os << "()";
    return;
  }
  os << "(\n";
  for (const auto& e : elems) os << "  " << e << "\n";
  os << ")";
}

// --- parsing -------------------------------------------------------------------

struct ParseBail {
  Diagnostic diag;
};

[[noreturn]] void fail(const std::string& code, const std::string& msg,
                       size_t offset) {
  Span sp;
  sp.offset = offset;
  throw ParseBail{Diagnostic::error(code, msg, sp)};
}

bool valid_id(const std::string& s) {
  if (s.empty() || !isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

bool rat_token(const std::string& s) {
  auto dot = s.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 >= s.size())
    return false;
  return all_digits(s.substr(0, dot)) && all_digits(s.substr(dot + 1));
}

std::optional<Op> term_op(const std::string& s) {
  static const std::map<std::string, Op> ops = {
      {"and", Op::And},   {"or", Op::Or},       {"not", Op::Not},
      {"ite", Op::Ite},   {"distinct", Op::Distinct},
      {"=>", Op::Implies}, {"=", Op::Eq},       {"<", Op::Lt},
      {">", Op::Gt},      {"<=", Op::Le},       {">=", Op::Ge},
      {"+", Op::Add},     {"-", Op::Sub},       {"*", Op::Mul},
      {"/", Op::Div},     {"mod", Op::Mod},     {"abs", Op::Abs},
      {"to_real", Op::ToReal}};
  auto it = ops.find(s);
  return it == ops.end() ? std::nullopt : std::optional<Op>(it->second);
}

TermPtr parse_term(const SExpr& e) {
  if (e.is_atom) {
    const std::string& a = e.atom;
    if (a == "true") return tm::truth();
    if (a == "false") return tm::falsity();
    if (all_digits(a)) return tm::constant(Rational(std::stoll(a)));
    if (rat_token(a)) return tm::constant(Rational::parse_decimal(a));
    bool primed = !a.empty() && a.back() == '~';
    std::string name = primed ? a.substr(0, a.size() - 1) : a;
    if (!valid_id(name)) fail("BAD_TOKEN", "bad token '" + a + "'", e.offset);
    return tm::var(name, primed);
  }
  if (e.items.empty() || !e.items[0].is_atom)
    fail("BAD_TERM", "expected an operator application", e.offset);
  auto op = term_op(e.items[0].atom);
  if (!op)
    fail("BAD_TERM", "unknown operator '" + e.items[0].atom + "'", e.offset);
  std::vector<TermPtr> args;
  for (size_t i = 1; i < e.size(); ++i) args.push_back(parse_term(e[i]));
  // constant folding keeps negative numerals and rationals canonical
  if (*op == Op::Sub && args.size() == 1 && args[0]->is_const())
    return tm::constant(-args[0]->value);
  if (*op == Op::Div && args.size() == 2 && args[0]->is_const() &&
      args[1]->is_const() && !args[1]->value.is_zero())
    return tm::constant(args[0]->value / args[1]->value);
  return tm::app(*op, std::move(args));
}

RpltlPtr parse_formula(const SExpr& e) {
  if (e.is_atom)
    fail("BAD_FORMULA", "formulas are parenthesized", e.offset);
  if (e.items.empty() || !e.items[0].is_atom)
    fail("BAD_FORMULA", "expected a formula operator", e.offset);
  const std::string& h = e.items[0].atom;
  auto want = [&](size_t n) {
    if (e.size() != n + 1)
      fail("BAD_FORMULA", "wrong arity for '" + h + "'", e.offset);
  };
  if (h == "ap") {
    want(1);
    return lt::atom(parse_term(e[1]));
  }
  if (h == "not" || h == "X" || h == "F" || h == "G") {
    want(1);
    RpltlPtr k = parse_formula(e[1]);
    if (h == "not") return lt::neg(k);
    if (h == "X") return lt::next(k);
    if (h == "F") return lt::eventually(k);
    return lt::globally(k);
  }
  if (h == "U" || h == "W" || h == "R") {
    want(2);
    RpltlPtr a = parse_formula(e[1]);
    RpltlPtr b = parse_formula(e[2]);
    if (h == "U") return lt::until(a, b);
    if (h == "W") return lt::weak_until(a, b);
    return lt::release(a, b);
  }
  if (h == "and" || h == "or") {
    std::vector<RpltlPtr> ks;
    for (size_t i = 1; i < e.size(); ++i) ks.push_back(parse_formula(e[i]));
    return h == "and" ? lt::conj(std::move(ks)) : lt::disj(std::move(ks));
  }
  fail("BAD_FORMULA", "unknown formula operator '" + h + "'", e.offset);
}

std::optional<WinCond> wincond_of(const std::string& s) {
  if (s == "Safety") return WinCond::Safety;
  if (s == "Reachability") return WinCond::Reachability;
  if (s == "Buechi") return WinCond::Buechi;
  if (s == "CoBuechi") return WinCond::CoBuechi;
  if (s == "ParityMaxOdd") return WinCond::ParityMaxOdd;
  return std::nullopt;
}

void typecheck_or_fail(const TermPtr& t, const VarEnv& env, size_t offset) {
  try {
    if (typecheck(t, env) != Sort::Bool)
      fail("SORT_ERROR", "term must be Bool", offset);
  } catch (const SortError& e) {
    fail("SORT_ERROR", e.what(), offset);
  } catch (const UnknownVariable& e) {
    fail("UNKNOWN_VARIABLE", e.what(), offset);
  } catch (const PrimedInput& e) {
    fail("PRIMED_INPUT", e.what(), offset);
  }
}

void fix_line_cols(const std::string& text, std::vector<Diagnostic>& ds) {
  for (auto& d : ds) {
    size_t off = std::min(d.span.offset, text.size());
    int line = 1, col = 1;
    for (size_t i = 0; i < off; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    d.span.line = line;
    d.span.col = col;
  }
}

}  // namespace

std::string emit_llissy(const Spec& spec) {
  std::ostringstream out;
  std::vector<std::string> vardecs;
  for (const auto& e : spec.env.entries()) {
    std::ostringstream os;
    os << "(" << (e.kind == VarKind::Input ? "input" : "state") << " "
       << to_string(e.sort) << " " << e.name << ")";
    vardecs.push_back(os.str());
  }
  std::vector<std::string> fspecs;
  for (const auto& f : spec.formulas) {
    std::ostringstream os;
    os << "((";
    for (size_t i = 0; i < f.assumes.size(); ++i) {
      if (i) os << " ";
      emit_formula(f.assumes[i], os);
    }
    os << ") (";
    for (size_t i = 0; i < f.asserts.size(); ++i) {
      if (i) os << " ";
      emit_formula(f.asserts[i], os);
    }
    os << "))";
    fspecs.push_back(os.str());
  }
  std::vector<std::string> gspecs;
  for (const auto& g : spec.games) {
    std::ostringstream os;
    os << "((";
    for (size_t i = 0; i < g.locations.size(); ++i) {
      const auto& l = g.locations[i];
      if (i) os << " ";
      os << "(" << l.name << " " << l.color << " ";
      emit_term(l.domain, os);
      os << ")";
    }
    os << ") (";
    for (size_t i = 0; i < g.transitions.size(); ++i) {
      const auto& t = g.transitions[i];
      if (i) os << " ";
      os << "(" << t.from << " " << t.to << " ";
      emit_term(t.guard, os);
      os << ")";
    }
    os << ") (" << g.initial << " " << to_string(g.wincond) << "))";
    gspecs.push_back(os.str());
  }

  out << "(";
  emit_list(vardecs, out);
  out << " ";
  emit_list(fspecs, out);
  out << " ";
  emit_list(gspecs, out);
  out << ")\n";
  return out.str();
}

ParseResult parse_llissy(const std::string& text) {
  ParseResult res;
  auto parsed = parse_sexprs(text, ';');
  if (parsed.error) {
    Span sp;
    sp.offset = parsed.error->offset;
    res.diagnostics.push_back(
        Diagnostic::error("UNBALANCED_PAREN", parsed.error->message, sp));
    fix_line_cols(text, res.diagnostics);
    return res;
  }
  try {
    if (parsed.exprs.size() != 1)
      fail("BAD_SPEC", "expected exactly one top-level specification",
           parsed.exprs.empty() ? 0 : parsed.exprs[1].offset);
    const SExpr& top = parsed.exprs[0];
    if (!top.is_list() || top.size() != 3 || !top[0].is_list() ||
        !top[1].is_list() || !top[2].is_list())
      fail("BAD_SPEC", "expected ((vardecs) (fspecs) (gspecs))", top.offset);

    Spec spec;
    for (const auto& v : top[0].items) {
      if (!v.is_list() || v.size() != 3 || !v[0].is_atom || !v[1].is_atom ||
          !v[2].is_atom)
        fail("BAD_VARDEC", "expected (input|state Type name)", v.offset);
      VarKind kind;
      if (v[0].atom == "input")
        kind = VarKind::Input;
      else if (v[0].atom == "state")
        kind = VarKind::State;
      else
        fail("BAD_VARDEC", "expected 'input' or 'state'", v[0].offset);
      Sort sort;
      if (v[1].atom == "Int")
        sort = Sort::Int;
      else if (v[1].atom == "Bool")
        sort = Sort::Bool;
      else if (v[1].atom == "Real")
        sort = Sort::Real;
      else
        fail("BAD_TYPE", "expected Int, Bool, or Real", v[1].offset);
      if (!valid_id(v[2].atom))
        fail("BAD_ID", "bad identifier '" + v[2].atom + "'", v[2].offset);
      if (spec.env.lookup(v[2].atom))
        fail("DUPLICATE_VAR", "variable '" + v[2].atom + "' already declared",
             v[2].offset);
      spec.env.declare(v[2].atom, kind, sort);
    }

    auto check_formula_atoms = [&](const RpltlPtr& f, size_t offset) {
      std::function<void(const RpltlPtr&)> walk = [&](const RpltlPtr& g) {
        if (g->op == LtlOp::Atom) {
          typecheck_or_fail(g->atom, spec.env, offset);
          return;
        }
        for (const auto& k : g->kids) walk(k);
      };
      walk(f);
    };

    for (const auto& fs : top[1].items) {
      if (!fs.is_list() || fs.size() != 2 || !fs[0].is_list() ||
          !fs[1].is_list())
        fail("BAD_FSPEC", "expected ((assumes) (asserts))", fs.offset);
      FormulaBlock block;
      for (const auto& a : fs[0].items) {
        RpltlPtr f = parse_formula(a);
        check_formula_atoms(f, a.offset);
        block.assumes.push_back(std::move(f));
      }
      for (const auto& a : fs[1].items) {
        RpltlPtr f = parse_formula(a);
        check_formula_atoms(f, a.offset);
        block.asserts.push_back(std::move(f));
      }
      spec.formulas.push_back(std::move(block));
    }

    for (const auto& gs : top[2].items) {
      if (!gs.is_list() || gs.size() != 3 || !gs[0].is_list() ||
          !gs[1].is_list() || !gs[2].is_list())
        fail("BAD_GSPEC", "expected ((locdefs) (transdefs) (obj))",
             gs.offset);
      GameBlock game;
      std::set<std::string> names;
      for (const auto& l : gs[0].items) {
        if (!l.is_list() || l.size() != 3 || !l[0].is_atom || !l[1].is_atom)
          fail("BAD_LOCDEF", "expected (name color domain)", l.offset);
        if (!valid_id(l[0].atom))
          fail("BAD_ID", "bad identifier '" + l[0].atom + "'", l[0].offset);
        if (!all_digits(l[1].atom))
          fail("BAD_COLOR", "location color must be a natural number",
               l[1].offset);
        if (!names.insert(l[0].atom).second)
          fail("DUPLICATE_LOCATION",
               "location '" + l[0].atom + "' already defined", l[0].offset);
        GameLocation loc;
        loc.name = l[0].atom;
        loc.color = std::stoull(l[1].atom);
        loc.domain = parse_term(l[2]);
        typecheck_or_fail(loc.domain, spec.env, l[2].offset);
        if (mentions_primed(loc.domain))
          fail("PRIMED_DOMAIN", "domains cannot mention primed variables",
               l[2].offset);
        if (mentions_input(loc.domain, spec.env))
          fail("INPUT_DOMAIN", "domains cannot mention input variables",
               l[2].offset);
        game.locations.push_back(std::move(loc));
      }
      for (const auto& t : gs[1].items) {
        if (!t.is_list() || t.size() != 3 || !t[0].is_atom || !t[1].is_atom)
          fail("BAD_TRANSDEF", "expected (from to guard)", t.offset);
        if (!names.count(t[0].atom))
          fail("UNKNOWN_LOCATION", "unknown location '" + t[0].atom + "'",
               t[0].offset);
        if (!names.count(t[1].atom))
          fail("UNKNOWN_LOCATION", "unknown location '" + t[1].atom + "'",
               t[1].offset);
        GameTransition tr;
        tr.from = t[0].atom;
        tr.to = t[1].atom;
        tr.guard = parse_term(t[2]);
        typecheck_or_fail(tr.guard, spec.env, t[2].offset);
        game.transitions.push_back(std::move(tr));
      }
      const SExpr& obj = gs[2];
      if (obj.size() != 2 || !obj[0].is_atom || !obj[1].is_atom)
        fail("BAD_OBJ", "expected (initial wincond)", obj.offset);
      if (!names.count(obj[0].atom))
        fail("UNKNOWN_LOCATION",
             "initial location '" + obj[0].atom + "' not declared",
             obj[0].offset);
      auto wc = wincond_of(obj[1].atom);
      if (!wc)
        fail("BAD_WINCOND", "unknown winning condition '" + obj[1].atom + "'",
             obj[1].offset);
      game.initial = obj[0].atom;
      game.wincond = *wc;
      spec.games.push_back(std::move(game));
    }

    auto global = front::check_global(spec);
    for (auto& d : global)
      if (d.severity == Diagnostic::Severity::Error)
        res.diagnostics.push_back(d);
    if (!has_errors(res.diagnostics)) res.spec = std::move(spec);
  } catch (const ParseBail& b) {
    res.diagnostics.push_back(b.diag);
  }
  fix_line_cols(text, res.diagnostics);
  return res;
}

}  // namespace issy::llissy
