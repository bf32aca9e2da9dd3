#include "issy/frontend.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <set>

#include "issy/logic.hpp"

namespace issy::front {

namespace {

// --- lexer -----------------------------------------------------------------

enum class Tok {
  Ident,
  Nat,
  Rat,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  AndAnd,
  OrOr,
  Bang,
  Arrow,   // ->
  DArrow,  // <->
  Eq,
  Lt,
  Gt,
  Le,
  Ge,
  Plus,
  Minus,
  Star,
  Slash,
  Eof,
};

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  bool primed = false;
  Span span;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1;
  int col = 1;
  std::vector<Diagnostic>* diags;

  Span here(size_t len = 1) const {
    return {line, col, pos, len};
  }

  void advance(size_t n = 1) {
    for (size_t i = 0; i < n && pos < src.size(); ++i) {
      if (src[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++pos;
    }
  }

  bool starts(const char* s) const {
    return src.compare(pos, strlen(s), s) == 0;
  }

  void skip_trivia() {
    for (;;) {
      if (pos >= src.size()) return;
      char c = src[pos];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
        continue;
      }
      if (starts("//")) {
        while (pos < src.size() && src[pos] != '\n') advance();
        continue;
      }
      if (starts("/*")) {
        Span open = here(2);
        advance(2);
        while (pos < src.size() && !starts("*/")) advance();
        if (pos >= src.size()) {
          diags->push_back(Diagnostic::error("UNTERMINATED_COMMENT",
                                             "unterminated /* comment", open));
          return;
        }
        advance(2);
        continue;
      }
      return;
    }
  }

  Token next() {
    skip_trivia();
    if (pos >= src.size()) return {Tok::Eof, "", false, here(0)};
    Span start = here();
    char c = src[pos];

    auto sym = [&](Tok k, size_t n) {
      Token t{k, src.substr(pos, n), false, start};
      t.span.length = n;
      advance(n);
      return t;
    };

    if (isalpha(static_cast<unsigned char>(c))) {
      size_t b = pos;
      while (pos < src.size() &&
             (isalnum(static_cast<unsigned char>(src[pos])) ||
              src[pos] == '_'))
        advance();
      Token t{Tok::Ident, src.substr(b, pos - b), false, start};
      t.span.length = pos - b;
      if (pos < src.size() && src[pos] == '\'') {
        t.primed = true;
        advance();
        ++t.span.length;
      }
      return t;
    }
    if (isdigit(static_cast<unsigned char>(c))) {
      size_t b = pos;
      while (pos < src.size() && isdigit(static_cast<unsigned char>(src[pos])))
        advance();
      bool rat = false;
      if (pos + 1 < src.size() && src[pos] == '.' &&
          isdigit(static_cast<unsigned char>(src[pos + 1]))) {
        rat = true;
        advance();
        while (pos < src.size() &&
               isdigit(static_cast<unsigned char>(src[pos])))
          advance();
      }
      Token t{rat ? Tok::Rat : Tok::Nat, src.substr(b, pos - b), false, start};
      t.span.length = pos - b;
      return t;
    }
    switch (c) {
      case '(': return sym(Tok::LParen, 1);
      case ')': return sym(Tok::RParen, 1);
      case '{': return sym(Tok::LBrace, 1);
      case '}': return sym(Tok::RBrace, 1);
      case '[': return sym(Tok::LBracket, 1);
      case ']': return sym(Tok::RBracket, 1);
      case '+': return sym(Tok::Plus, 1);
      case '*': return sym(Tok::Star, 1);
      case '/': return sym(Tok::Slash, 1);
      case '=': return sym(Tok::Eq, 1);
      case '!': return sym(Tok::Bang, 1);
      case '&':
        if (starts("&&")) return sym(Tok::AndAnd, 2);
        break;
      case '|':
        if (starts("||")) return sym(Tok::OrOr, 2);
        break;
      case '-':
        if (starts("->")) return sym(Tok::Arrow, 2);
        return sym(Tok::Minus, 1);
      case '<':
        if (starts("<->")) return sym(Tok::DArrow, 3);
        if (starts("<=")) return sym(Tok::Le, 2);
        return sym(Tok::Lt, 1);
      case '>':
        if (starts(">=")) return sym(Tok::Ge, 2);
        return sym(Tok::Gt, 1);
      default:
        break;
    }
    diags->push_back(Diagnostic::error(
        "BAD_CHARACTER", std::string("unexpected character '") + c + "'",
        start));
    advance();
    return next();
  }
};

// --- parser ----------------------------------------------------------------

const std::set<std::string> kKeywords = {
    "input",  "state",  "int",   "bool",    "real",   "formula",
    "assert", "assume", "game",  "from",    "to",     "loc",
    "with",   "def",    "keep",  "havoc",   "true",   "false",
    "Safety", "Reachability",    "Buechi",  "CoBuechi",
    "ParityMaxOdd",     "mod",   "abs"};

const std::set<std::string> kTemporal = {"F", "X", "G", "U", "W", "R"};

bool reserved_name(const std::string& n) {
  if (kKeywords.count(n) || kTemporal.count(n)) return true;
  const std::string suf = kSmtPrimeSuffix;  // D11
  return n.size() >= suf.size() &&
         n.compare(n.size() - suf.size(), suf.size(), suf) == 0;
}

SynPtr mk(SynExpr::Kind k, Span span) {
  auto e = std::make_shared<SynExpr>();
  e->kind = k;
  e->span = span;
  return e;
}

struct Parser {
  Lexer lex;
  Token tok;
  std::vector<Diagnostic>& diags;
  SourceSpec out;
  bool fatal = false;

  explicit Parser(const std::string& text, std::vector<Diagnostic>& d)
      : lex{text, 0, 1, 1, &d}, diags(d) {
    tok = lex.next();
  }

  void bump() { tok = lex.next(); }

  bool at_ident(const char* s) const {
    return tok.kind == Tok::Ident && !tok.primed && tok.text == s;
  }

  void error_here(const std::string& code, const std::string& msg) {
    diags.push_back(Diagnostic::error(code, msg, tok.span));
  }

  bool expect_ident(const char* what, std::string* name, Span* sp = nullptr) {
    if (tok.kind != Tok::Ident || tok.primed) {
      error_here("EXPECTED_IDENT", std::string("expected ") + what);
      return false;
    }
    if (kKeywords.count(tok.text)) {
      error_here("EXPECTED_IDENT", std::string("expected ") + what +
                                       ", found keyword '" + tok.text + "'");
      return false;
    }
    *name = tok.text;
    if (sp) *sp = tok.span;
    bump();
    return true;
  }

  bool expect(Tok k, const char* what) {
    if (tok.kind != k) {
      error_here("EXPECTED_TOKEN", std::string("expected ") + what);
      return false;
    }
    bump();
    return true;
  }

  // Skip to the next plausible top-level item after an error.
  void resync_top() {
    while (tok.kind != Tok::Eof) {
      if (tok.kind == Tok::Ident &&
          (tok.text == "input" || tok.text == "state" ||
           tok.text == "formula" || tok.text == "game" || tok.text == "def"))
        return;
      bump();
    }
  }

  void run() {
    while (tok.kind != Tok::Eof) {
      size_t before = diags.size();
      if (at_ident("input") || at_ident("state")) {
        parse_vardecl();
      } else if (at_ident("formula")) {
        parse_formula_block();
      } else if (at_ident("game")) {
        parse_game_block();
      } else if (at_ident("def")) {
        parse_macro();
      } else {
        error_here("EXPECTED_ITEM",
                   "expected 'input', 'state', 'formula', 'game', or 'def'");
        bump();
      }
      if (diags.size() > before) resync_top();
    }
  }

  void parse_vardecl() {
    Span sp = tok.span;
    VarKind kind = tok.text == "input" ? VarKind::Input : VarKind::State;
    bump();
    Sort sort;
    if (at_ident("int")) {
      sort = Sort::Int;
    } else if (at_ident("bool")) {
      sort = Sort::Bool;
    } else if (at_ident("real")) {
      sort = Sort::Real;
    } else {
      error_here("EXPECTED_TYPE", "expected 'int', 'bool', or 'real'");
      return;
    }
    bump();
    std::string name;
    Span nsp;
    if (!expect_ident("variable name", &name, &nsp)) return;
    if (reserved_name(name)) {
      diags.push_back(Diagnostic::error(
          "RESERVED_IDENT", "'" + name + "' is reserved", nsp));
      return;
    }
    out.vars.push_back({kind, sort, name, sp});
    out.order.push_back({SourceSpec::ItemKind::Var, out.vars.size() - 1});
  }

  void parse_formula_block() {
    Span sp = tok.span;
    bump();
    if (!expect(Tok::LBrace, "'{'")) return;
    FormulaBlockSyntax block;
    block.span = sp;
    while (tok.kind != Tok::RBrace && tok.kind != Tok::Eof) {
      bool assume;
      if (at_ident("assume")) {
        assume = true;
      } else if (at_ident("assert")) {
        assume = false;
      } else {
        error_here("EXPECTED_LOGICSTM", "expected 'assume' or 'assert'");
        return;
      }
      Span ssp = tok.span;
      bump();
      SynPtr f = parse_expr(/*temporal=*/true);
      if (!f) return;
      block.stmts.push_back({assume, f, ssp});
    }
    if (!expect(Tok::RBrace, "'}'")) return;
    out.formulas.push_back(std::move(block));
    out.order.push_back(
        {SourceSpec::ItemKind::Formula, out.formulas.size() - 1});
  }

  void parse_game_block() {
    Span sp = tok.span;
    bump();
    GameBlockSyntax g;
    g.span = sp;
    if (tok.kind == Tok::Ident && !tok.primed) {
      if (tok.text == "Safety") g.wincond = WinCond::Safety;
      else if (tok.text == "Reachability") g.wincond = WinCond::Reachability;
      else if (tok.text == "Buechi") g.wincond = WinCond::Buechi;
      else if (tok.text == "CoBuechi") g.wincond = WinCond::CoBuechi;
      else if (tok.text == "ParityMaxOdd") g.wincond = WinCond::ParityMaxOdd;
      else {
        error_here("EXPECTED_WINCOND", "expected a winning condition");
        return;
      }
      bump();
    } else {
      error_here("EXPECTED_WINCOND", "expected a winning condition");
      return;
    }
    if (!at_ident("from")) {
      error_here("EXPECTED_FROM", "expected 'from'");
      return;
    }
    bump();
    if (!expect_ident("initial location", &g.initial)) return;
    if (!expect(Tok::LBrace, "'{'")) return;
    while (tok.kind != Tok::RBrace && tok.kind != Tok::Eof) {
      if (at_ident("loc")) {
        Span lsp = tok.span;
        bump();
        LocDefSyntax loc;
        loc.span = lsp;
        if (!expect_ident("location name", &loc.name)) return;
        if (tok.kind == Tok::Nat) {
          loc.color = std::stoull(tok.text);
          bump();
        }
        if (at_ident("with")) {
          bump();
          loc.domain = parse_expr(/*temporal=*/false);
          if (!loc.domain) return;
        }
        g.locs.push_back(std::move(loc));
      } else if (at_ident("from")) {
        Span tsp = tok.span;
        bump();
        TransDefSyntax tr;
        tr.span = tsp;
        if (!expect_ident("source location", &tr.from)) return;
        if (!at_ident("to")) {
          error_here("EXPECTED_TO", "expected 'to'");
          return;
        }
        bump();
        if (!expect_ident("target location", &tr.to)) return;
        if (!at_ident("with")) {
          error_here("EXPECTED_WITH", "expected 'with'");
          return;
        }
        bump();
        tr.guard = parse_expr(/*temporal=*/false);
        if (!tr.guard) return;
        g.trans.push_back(std::move(tr));
      } else {
        error_here("EXPECTED_GAMEITEM", "expected 'loc' or 'from'");
        return;
      }
    }
    if (!expect(Tok::RBrace, "'}'")) return;
    out.games.push_back(std::move(g));
    out.order.push_back({SourceSpec::ItemKind::Game, out.games.size() - 1});
  }

  void parse_macro() {
    Span sp = tok.span;
    bump();
    MacroDefSyntax m;
    m.span = sp;
    Span nsp;
    if (!expect_ident("macro name", &m.name, &nsp)) return;
    if (reserved_name(m.name)) {
      diags.push_back(Diagnostic::error("RESERVED_IDENT",
                                        "'" + m.name + "' is reserved", nsp));
      return;
    }
    if (!expect(Tok::Eq, "'='")) return;
    m.body = parse_expr(/*temporal=*/false);
    if (!m.body) return;
    out.macros.push_back(std::move(m));
    out.order.push_back({SourceSpec::ItemKind::Macro, out.macros.size() - 1});
  }

  // --- expressions (rpltl when temporal, plain formulas otherwise) ---------

  SynPtr parse_expr(bool temporal) { return parse_iff(temporal); }

  SynPtr binary(const std::string& op, SynPtr a, SynPtr b) {
    auto e = mk(SynExpr::Kind::Binary, a->span);
    e->op = op;
    e->kids = {std::move(a), std::move(b)};
    return e;
  }

  SynPtr parse_iff(bool t) {
    SynPtr a = parse_imp(t);
    if (!a) return nullptr;
    if (tok.kind == Tok::DArrow) {
      bump();
      SynPtr b = parse_iff(t);  // right-assoc
      if (!b) return nullptr;
      return binary("<->", std::move(a), std::move(b));
    }
    return a;
  }

  SynPtr parse_imp(bool t) {
    SynPtr a = parse_or(t);
    if (!a) return nullptr;
    if (tok.kind == Tok::Arrow) {
      bump();
      SynPtr b = parse_imp(t);  // right-assoc
      if (!b) return nullptr;
      return binary("->", std::move(a), std::move(b));
    }
    return a;
  }

  SynPtr parse_or(bool t) {
    SynPtr a = parse_and(t);
    if (!a) return nullptr;
    while (tok.kind == Tok::OrOr) {
      bump();
      SynPtr b = parse_and(t);
      if (!b) return nullptr;
      a = binary("||", std::move(a), std::move(b));
    }
    return a;
  }

  SynPtr parse_and(bool t) {
    SynPtr a = parse_until(t);
    if (!a) return nullptr;
    while (tok.kind == Tok::AndAnd) {
      bump();
      SynPtr b = parse_until(t);
      if (!b) return nullptr;
      a = binary("&&", std::move(a), std::move(b));
    }
    return a;
  }

  bool at_temporal_binop() const {
    return tok.kind == Tok::Ident && !tok.primed &&
           (tok.text == "U" || tok.text == "W" || tok.text == "R");
  }

  SynPtr parse_until(bool t) {
    SynPtr a = parse_unary(t);
    if (!a) return nullptr;
    if (t && at_temporal_binop()) {
      std::string op = tok.text;
      bump();
      SynPtr b = parse_until(t);  // right-assoc (D6)
      if (!b) return nullptr;
      return binary(op, std::move(a), std::move(b));
    }
    if (!t && at_temporal_binop()) {
      error_here("TEMPORAL_IN_FORMULA",
                 "temporal operator not allowed here");
      return nullptr;
    }
    return a;
  }

  bool at_temporal_unop() const {
    return tok.kind == Tok::Ident && !tok.primed &&
           (tok.text == "F" || tok.text == "X" || tok.text == "G");
  }

  SynPtr parse_unary(bool t) {
    if (tok.kind == Tok::Bang) {
      Span sp = tok.span;
      bump();
      SynPtr a = parse_unary(t);
      if (!a) return nullptr;
      auto e = mk(SynExpr::Kind::Unary, sp);
      e->op = "!";
      e->kids = {std::move(a)};
      return e;
    }
    if (at_temporal_unop()) {
      if (!t) {
        error_here("TEMPORAL_IN_FORMULA",
                   "temporal operator not allowed here");
        return nullptr;
      }
      Span sp = tok.span;
      std::string op = tok.text;
      bump();
      SynPtr a = parse_unary(t);
      if (!a) return nullptr;
      auto e = mk(SynExpr::Kind::Unary, sp);
      e->op = op;
      e->kids = {std::move(a)};
      return e;
    }
    return parse_atom(t);
  }

  SynPtr parse_atom(bool t) {
    Span sp = tok.span;
    switch (tok.kind) {
      case Tok::LParen: {
        bump();
        SynPtr inner = parse_expr(t);
        if (!inner) return nullptr;
        if (!expect(Tok::RParen, "')'")) return nullptr;
        return inner;
      }
      case Tok::LBracket: {
        bump();
        SynPtr p = parse_pred();
        if (!p) return nullptr;
        if (!expect(Tok::RBracket, "']'")) return nullptr;
        auto e = mk(SynExpr::Kind::Pred, sp);
        e->kids = {std::move(p)};
        return e;
      }
      case Tok::Ident: {
        if (!tok.primed && tok.text == "true") {
          bump();
          return mk(SynExpr::Kind::True, sp);
        }
        if (!tok.primed && tok.text == "false") {
          bump();
          return mk(SynExpr::Kind::False, sp);
        }
        if (!tok.primed && (tok.text == "keep" || tok.text == "havoc")) {
          bool is_keep = tok.text == "keep";
          bump();
          if (!expect(Tok::LParen, "'('")) return nullptr;
          auto e = mk(is_keep ? SynExpr::Kind::Keep : SynExpr::Kind::Havoc,
                      sp);
          while (tok.kind == Tok::Ident && !tok.primed) {
            e->names.push_back(tok.text);
            bump();
          }
          if (!expect(Tok::RParen, "')'")) return nullptr;
          return e;
        }
        if (kKeywords.count(tok.text) || kTemporal.count(tok.text)) {
          error_here("UNEXPECTED_KEYWORD",
                     "unexpected '" + tok.text + "' in expression");
          return nullptr;
        }
        auto e = mk(SynExpr::Kind::Ident, sp);
        e->text = tok.text;
        e->primed = tok.primed;
        bump();
        return e;
      }
      default:
        error_here("EXPECTED_ATOM", "expected an atom");
        return nullptr;
    }
  }

  // --- predicates inside [ ] ------------------------------------------------

  SynPtr parse_pred() { return parse_cmp(); }

  SynPtr parse_cmp() {
    SynPtr a = parse_addsub();
    if (!a) return nullptr;
    for (;;) {
      std::string op;
      switch (tok.kind) {
        case Tok::Eq: op = "="; break;
        case Tok::Lt: op = "<"; break;
        case Tok::Gt: op = ">"; break;
        case Tok::Le: op = "<="; break;
        case Tok::Ge: op = ">="; break;
        default: return a;
      }
      bump();
      SynPtr b = parse_addsub();
      if (!b) return nullptr;
      a = binary(op, std::move(a), std::move(b));
    }
  }

  SynPtr parse_addsub() {
    SynPtr a = parse_muldiv();
    if (!a) return nullptr;
    for (;;) {
      std::string op;
      if (tok.kind == Tok::Plus) op = "+";
      else if (tok.kind == Tok::Minus) op = "-";
      else return a;
      bump();
      SynPtr b = parse_muldiv();
      if (!b) return nullptr;
      a = binary(op, std::move(a), std::move(b));
    }
  }

  SynPtr parse_muldiv() {
    SynPtr a = parse_prefix();
    if (!a) return nullptr;
    for (;;) {
      std::string op;
      if (tok.kind == Tok::Star) op = "*";
      else if (tok.kind == Tok::Slash) op = "/";
      else if (at_ident("mod")) op = "mod";
      else return a;
      bump();
      SynPtr b = parse_prefix();
      if (!b) return nullptr;
      a = binary(op, std::move(a), std::move(b));
    }
  }

  SynPtr parse_prefix() {
    if (tok.kind == Tok::Minus) {
      Span sp = tok.span;
      bump();
      SynPtr a = parse_prefix();
      if (!a) return nullptr;
      auto e = mk(SynExpr::Kind::Unary, sp);
      e->op = "-";
      e->kids = {std::move(a)};
      return e;
    }
    if (at_ident("abs")) {
      Span sp = tok.span;
      bump();
      SynPtr a = parse_prefix();
      if (!a) return nullptr;
      auto e = mk(SynExpr::Kind::Unary, sp);
      e->op = "abs";
      e->kids = {std::move(a)};
      return e;
    }
    return parse_prim();
  }

  SynPtr parse_prim() {
    Span sp = tok.span;
    switch (tok.kind) {
      case Tok::Nat:
      case Tok::Rat: {
        auto e = mk(SynExpr::Kind::Numeral, sp);
        e->text = tok.text;
        bump();
        return e;
      }
      case Tok::LParen: {
        bump();
        SynPtr inner = parse_pred();
        if (!inner) return nullptr;
        if (!expect(Tok::RParen, "')'")) return nullptr;
        return inner;
      }
      case Tok::Ident: {
        if (!tok.primed && tok.text == "true") {
          bump();
          return mk(SynExpr::Kind::True, sp);
        }
        if (!tok.primed && tok.text == "false") {
          bump();
          return mk(SynExpr::Kind::False, sp);
        }
        if (kKeywords.count(tok.text) || kTemporal.count(tok.text)) {
          error_here("UNEXPECTED_KEYWORD",
                     "unexpected '" + tok.text + "' in predicate");
          return nullptr;
        }
        auto e = mk(SynExpr::Kind::Ident, sp);
        e->text = tok.text;
        e->primed = tok.primed;
        bump();
        return e;
      }
      default:
        error_here("EXPECTED_PRED", "expected a predicate term");
        return nullptr;
    }
  }
};

}  // namespace

ParseResult parse_issy(const std::string& text) {
  ParseResult res;
  Parser p(text, res.diagnostics);
  p.run();
  if (!has_errors(res.diagnostics)) res.spec = std::move(p.out);
  return res;
}

// --- macro expansion ---------------------------------------------------------

namespace {

// Replaces Ident nodes naming macros. `in_pred` switches the atomicity rule.
SynPtr substitute_macros(const SynPtr& e,
                         const std::map<std::string, SynPtr>& macros,
                         bool in_pred, std::vector<Diagnostic>& diags) {
  if (!e) return e;
  if (e->kind == SynExpr::Kind::Ident) {
    auto it = macros.find(e->text);
    if (it == macros.end()) return e;
    if (e->primed) {
      diags.push_back(Diagnostic::error(
          "PRIMED_MACRO", "macro reference '" + e->text + "' cannot be primed",
          e->span));
      return e;
    }
    if (in_pred) {
      // Inside [ ], only a single bracketed predicate body may stand in.
      if (it->second->kind != SynExpr::Kind::Pred) {
        diags.push_back(Diagnostic::error(
            "MACRO_IN_PRED_NOT_ATOMIC",
            "macro '" + e->text +
                "' used inside a predicate must be a single predicate term",
            e->span));
        return e;
      }
      return it->second->kids[0];
    }
    return it->second;
  }
  bool child_pred = in_pred || e->kind == SynExpr::Kind::Pred;
  auto copy = std::make_shared<SynExpr>(*e);
  for (auto& k : copy->kids)
    k = substitute_macros(k, macros, child_pred, diags);
  return copy;
}

void collect_idents(const SynPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == SynExpr::Kind::Ident) out.insert(e->text);
  for (const auto& k : e->kids) collect_idents(k, out);
}

}  // namespace

ExpandResult expand_macros(const SourceSpec& ast) {
  ExpandResult res;
  std::map<std::string, SynPtr> macros;
  std::set<std::string> var_names;
  for (const auto& v : ast.vars) var_names.insert(v.name);

  for (const auto& m : ast.macros) {
    if (var_names.count(m.name)) {
      res.diagnostics.push_back(Diagnostic::error(
          "MACRO_SHADOWS_VAR",
          "macro '" + m.name + "' collides with a variable", m.span));
      continue;
    }
    if (macros.count(m.name)) {
      res.diagnostics.push_back(Diagnostic::error(
          "DUPLICATE_MACRO", "macro '" + m.name + "' already defined",
          m.span));
      continue;
    }
    std::set<std::string> used;
    collect_idents(m.body, used);
    if (used.count(m.name)) {
      res.diagnostics.push_back(Diagnostic::error(
          "CYCLIC_MACRO",
          "macro '" + m.name + "' refers to itself (macros may only use "
          "earlier definitions)",
          m.span));
      continue;
    }
    // Earlier macros expand inside this body now, so stored bodies are
    // always macro-free (makes expansion idempotent).
    macros[m.name] =
        substitute_macros(m.body, macros, /*in_pred=*/false, res.diagnostics);
  }

  SourceSpec out;
  out.vars = ast.vars;
  for (const auto& f : ast.formulas) {
    FormulaBlockSyntax nf = f;
    for (auto& s : nf.stmts)
      s.formula =
          substitute_macros(s.formula, macros, false, res.diagnostics);
    out.formulas.push_back(std::move(nf));
  }
  for (const auto& g : ast.games) {
    GameBlockSyntax ng = g;
    for (auto& l : ng.locs)
      if (l.domain)
        l.domain = substitute_macros(l.domain, macros, false, res.diagnostics);
    for (auto& t : ng.trans)
      t.guard = substitute_macros(t.guard, macros, false, res.diagnostics);
    out.games.push_back(std::move(ng));
  }
  for (const auto& item : ast.order)
    if (item.kind != SourceSpec::ItemKind::Macro)
      out.order.push_back(item);

  if (!has_errors(res.diagnostics)) res.spec = std::move(out);
  return res;
}

// --- elaboration ---------------------------------------------------------------

namespace {

struct Elab {
  const VarEnv& env;
  std::vector<Diagnostic>& diags;

  TermPtr term_of(const SynPtr& e) {
    switch (e->kind) {
      case SynExpr::Kind::True: return tm::truth();
      case SynExpr::Kind::False: return tm::falsity();
      case SynExpr::Kind::Numeral:
        return tm::constant(Rational::parse_decimal(e->text));
      case SynExpr::Kind::Ident: {
        const auto* entry = env.lookup(e->text);
        if (!entry) {
          diags.push_back(Diagnostic::error(
              "UNKNOWN_VARIABLE", "unknown variable '" + e->text + "'",
              e->span));
          return tm::falsity();
        }
        return tm::var(e->text, e->primed);
      }
      case SynExpr::Kind::Pred:
        return term_of(e->kids[0]);
      case SynExpr::Kind::Keep: {
        std::vector<TermPtr> eqs;
        for (const auto& n : e->names) {
          const auto* entry = env.lookup(n);
          if (!entry) {
            diags.push_back(Diagnostic::error(
                "UNKNOWN_VARIABLE", "unknown variable '" + n + "'", e->span));
            continue;
          }
          if (entry->kind == VarKind::Input) {
            diags.push_back(Diagnostic::error(
                "PRIMED_INPUT", "keep() cannot mention input '" + n + "'",
                e->span));
            continue;
          }
          eqs.push_back(tm::eq(tm::var(n, true), tm::var(n)));
        }
        return tm::conj(std::move(eqs));
      }
      case SynExpr::Kind::Havoc: {
        // havoc leaves the listed variables unconstrained (D8); names are
        // still validated.
        for (const auto& n : e->names)
          if (!env.lookup(n))
            diags.push_back(Diagnostic::error(
                "UNKNOWN_VARIABLE", "unknown variable '" + n + "'", e->span));
        return tm::truth();
      }
      case SynExpr::Kind::Unary: {
        TermPtr a = term_of(e->kids[0]);
        if (e->op == "!") return tm::neg(std::move(a));
        if (e->op == "-") {
          // negative numerals are constants, matching the LLissy reader
          if (a->is_const()) return tm::constant(-a->value);
          return tm::minus(std::move(a));
        }
        if (e->op == "abs") return tm::app(Op::Abs, {std::move(a)});
        diags.push_back(Diagnostic::error(
            "TEMPORAL_IN_FORMULA",
            "temporal operator '" + e->op + "' not allowed here", e->span));
        return tm::falsity();
      }
      case SynExpr::Kind::Binary: {
        TermPtr a = term_of(e->kids[0]);
        TermPtr b = term_of(e->kids[1]);
        const std::string& op = e->op;
        if (op == "&&") return tm::conj({a, b});
        if (op == "||") return tm::disj({a, b});
        if (op == "->") return tm::implies(a, b);
        if (op == "<->") return tm::eq(a, b);
        if (op == "=") return tm::eq(a, b);
        if (op == "<") return tm::lt(a, b);
        if (op == ">") return tm::gt(a, b);
        if (op == "<=") return tm::le(a, b);
        if (op == ">=") return tm::ge(a, b);
        if (op == "+") return tm::add({a, b});
        if (op == "-") return tm::sub(a, b);
        if (op == "*") return tm::mul({a, b});
        if (op == "/") {
          // rational literals like 2/3 are constants, matching LLissy
          if (a->is_const() && b->is_const() && !b->value.is_zero())
            return tm::constant(a->value / b->value);
          return tm::app(Op::Div, {a, b});
        }
        if (op == "mod") return tm::app(Op::Mod, {a, b});
        diags.push_back(Diagnostic::error(
            "TEMPORAL_IN_FORMULA",
            "temporal operator '" + op + "' not allowed here", e->span));
        return tm::falsity();
      }
    }
    return tm::falsity();
  }

  // A boolean term, typechecked against env; records a diagnostic and
  // returns false on failure.
  std::optional<TermPtr> bool_term_of(const SynPtr& e) {
    size_t before = diags.size();
    TermPtr t = term_of(e);
    if (diags.size() > before) return std::nullopt;
    try {
      Sort s = typecheck(t, env);
      if (s != Sort::Bool) {
        diags.push_back(Diagnostic::error(
            "SORT_ERROR", "expected a Bool formula", e->span));
        return std::nullopt;
      }
    } catch (const PrimedInput& ex) {
      diags.push_back(
          Diagnostic::error("PRIMED_INPUT", ex.what(), e->span));
      return std::nullopt;
    } catch (const UnknownVariable& ex) {
      diags.push_back(
          Diagnostic::error("UNKNOWN_VARIABLE", ex.what(), e->span));
      return std::nullopt;
    } catch (const SortError& ex) {
      diags.push_back(Diagnostic::error("SORT_ERROR", ex.what(), e->span));
      return std::nullopt;
    }
    return t;
  }

  RpltlPtr rpltl_of(const SynPtr& e) {
    switch (e->kind) {
      case SynExpr::Kind::Unary: {
        if (e->op == "!") return lt::neg(rpltl_of(e->kids[0]));
        if (e->op == "F") return lt::eventually(rpltl_of(e->kids[0]));
        if (e->op == "X") return lt::next(rpltl_of(e->kids[0]));
        if (e->op == "G") return lt::globally(rpltl_of(e->kids[0]));
        break;  // "-"/"abs" cannot be Bool; fall through to atom path
      }
      case SynExpr::Kind::Binary: {
        const std::string& op = e->op;
        if (op == "&&")
          return lt::conj({rpltl_of(e->kids[0]), rpltl_of(e->kids[1])});
        if (op == "||")
          return lt::disj({rpltl_of(e->kids[0]), rpltl_of(e->kids[1])});
        if (op == "->")
          return lt::implies(rpltl_of(e->kids[0]), rpltl_of(e->kids[1]));
        if (op == "<->")
          return lt::iff(rpltl_of(e->kids[0]), rpltl_of(e->kids[1]));
        if (op == "U")
          return lt::until(rpltl_of(e->kids[0]), rpltl_of(e->kids[1]));
        if (op == "W")
          return lt::weak_until(rpltl_of(e->kids[0]), rpltl_of(e->kids[1]));
        if (op == "R")
          return lt::release(rpltl_of(e->kids[0]), rpltl_of(e->kids[1]));
        break;  // comparison: an atom
      }
      default:
        break;
    }
    auto t = bool_term_of(e);
    return lt::atom(t ? *t : tm::falsity());
  }
};

}  // namespace

ElaborateResult elaborate(const SourceSpec& ast) {
  ElaborateResult res;
  Spec spec;
  for (const auto& v : ast.vars) {
    if (spec.env.lookup(v.name)) {
      res.diagnostics.push_back(Diagnostic::error(
          "DUPLICATE_VAR", "variable '" + v.name + "' already declared",
          v.span));
      continue;
    }
    spec.env.declare(v.name, v.kind, v.sort);
  }
  Elab el{spec.env, res.diagnostics};

  for (const auto& f : ast.formulas) {
    FormulaBlock block;
    for (const auto& s : f.stmts) {
      RpltlPtr r = el.rpltl_of(s.formula);
      (s.is_assume ? block.assumes : block.asserts).push_back(std::move(r));
    }
    spec.formulas.push_back(std::move(block));
  }

  for (const auto& g : ast.games) {
    GameBlock game;
    game.wincond = g.wincond;
    game.initial = g.initial;
    std::set<std::string> loc_names;
    for (const auto& l : g.locs) {
      if (!loc_names.insert(l.name).second) {
        res.diagnostics.push_back(Diagnostic::error(
            "DUPLICATE_LOCATION", "location '" + l.name + "' already defined",
            l.span));
        continue;
      }
      GameLocation loc;
      loc.name = l.name;
      if (l.color) {
        loc.color = *l.color;
      } else {
        loc.color = 1;  // D9
        res.diagnostics.push_back(Diagnostic::warning(
            "DEFAULT_COLOR",
            "location '" + l.name + "' has no color; defaulting to 1",
            l.span));
      }
      if (l.domain) {
        auto dom = el.bool_term_of(l.domain);
        loc.domain = dom ? *dom : tm::truth();
        if (dom) {
          if (mentions_primed(loc.domain))
            res.diagnostics.push_back(Diagnostic::error(
                "PRIMED_DOMAIN", "location domains cannot mention primed "
                                 "variables",
                l.span));
          if (mentions_input(loc.domain, spec.env))
            res.diagnostics.push_back(Diagnostic::error(
                "INPUT_DOMAIN",
                "location domains cannot mention input variables", l.span));
        }
      } else {
        loc.domain = tm::truth();
      }
      game.locations.push_back(std::move(loc));
    }
    for (const auto& t : g.trans) {
      GameTransition tr;
      tr.from = t.from;
      tr.to = t.to;
      if (!loc_names.count(t.from))
        res.diagnostics.push_back(Diagnostic::error(
            "UNKNOWN_LOCATION", "unknown location '" + t.from + "'", t.span));
      if (!loc_names.count(t.to))
        res.diagnostics.push_back(Diagnostic::error(
            "UNKNOWN_LOCATION", "unknown location '" + t.to + "'", t.span));
      auto guard = el.bool_term_of(t.guard);
      tr.guard = guard ? *guard : tm::truth();
      game.transitions.push_back(std::move(tr));
    }
    spec.games.push_back(std::move(game));
  }

  if (!has_errors(res.diagnostics)) res.spec = std::move(spec);
  return res;
}

// --- whole-spec checks ------------------------------------------------------

std::vector<Diagnostic> check_global(const Spec& spec) {
  std::vector<Diagnostic> out;

  int non_safety = 0;
  for (const auto& f : spec.formulas) {
    RpltlPtr impl = lt::implies(lt::conj(f.assumes), lt::conj(f.asserts));
    if (!logic::is_syntactic_safety(impl)) ++non_safety;
  }
  for (const auto& g : spec.games)
    if (g.wincond != WinCond::Safety) ++non_safety;
  if (non_safety > 1)
    out.push_back(Diagnostic::error(
        "MULTIPLE_NONSAFETY",
        "at most one component may have a non-safety winning condition "
        "(found " +
            std::to_string(non_safety) + ")"));

  for (const auto& g : spec.games) {
    std::set<std::string> names;
    for (const auto& l : g.locations) names.insert(l.name);
    if (!names.count(g.initial)) {
      out.push_back(Diagnostic::error(
          "UNKNOWN_INITIAL",
          "initial location '" + g.initial + "' is not declared"));
      continue;
    }
    // Reachability over the location graph.
    std::set<std::string> seen{g.initial};
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& t : g.transitions)
        if (seen.count(t.from) && seen.insert(t.to).second) grew = true;
    }
    for (const auto& l : g.locations)
      if (!seen.count(l.name))
        out.push_back(Diagnostic::warning(
            "UNREACHABLE_LOCATION",
            "location '" + l.name + "' is unreachable from the initial "
            "location"));
  }
  return out;
}

FrontResult load_issy(const std::string& text) {
  FrontResult res;
  auto parsed = parse_issy(text);
  res.diagnostics = parsed.diagnostics;
  if (!parsed.spec) return res;
  auto expanded = expand_macros(*parsed.spec);
  res.diagnostics.insert(res.diagnostics.end(), expanded.diagnostics.begin(),
                         expanded.diagnostics.end());
  if (!expanded.spec) return res;
  auto elab = elaborate(*expanded.spec);
  res.diagnostics.insert(res.diagnostics.end(), elab.diagnostics.begin(),
                         elab.diagnostics.end());
  if (!elab.spec) return res;
  auto global = check_global(*elab.spec);
  res.diagnostics.insert(res.diagnostics.end(), global.begin(), global.end());
  if (!has_errors(res.diagnostics)) res.spec = std::move(elab.spec);
  return res;
}

}  // namespace issy::front
