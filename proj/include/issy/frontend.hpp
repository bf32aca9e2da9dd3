#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "issy/diagnostics.hpp"
#include "issy/spec.hpp"

namespace issy::front {

// Surface expression tree shared by RP-LTL formulas, game formulas, and
// bracketed predicates. Operator spellings are kept as written; elaboration
// assigns meaning.
struct SynExpr;
using SynPtr = std::shared_ptr<SynExpr>;

struct SynExpr {
  enum class Kind {
    True,
    False,
    Numeral,  // text holds the token (nat or rat)
    Ident,    // variable or macro reference; primed flag from trailing '
    Pred,     // [ pred ] with one child
    Unary,    // op: ! F X G - abs
    Binary,   // op: && || -> <-> U W R + - * / mod = < > <= >=
    Keep,
    Havoc,
  };
  Kind kind;
  Span span;
  std::string text;  // Ident name / Numeral text
  bool primed = false;
  std::string op;
  std::vector<SynPtr> kids;
  std::vector<std::string> names;  // keep/havoc argument lists
};

struct VarDeclSyntax {
  VarKind kind;
  Sort sort;
  std::string name;
  Span span;
};

struct LogicStmtSyntax {
  bool is_assume = false;
  SynPtr formula;
  Span span;
};

struct FormulaBlockSyntax {
  std::vector<LogicStmtSyntax> stmts;
  Span span;
};

struct LocDefSyntax {
  std::string name;
  std::optional<uint64_t> color;
  SynPtr domain;  // null when omitted
  Span span;
};

struct TransDefSyntax {
  std::string from;
  std::string to;
  SynPtr guard;
  Span span;
};

struct GameBlockSyntax {
  WinCond wincond = WinCond::Safety;
  std::string initial;
  std::vector<LocDefSyntax> locs;
  std::vector<TransDefSyntax> trans;
  Span span;
};

struct MacroDefSyntax {
  std::string name;
  SynPtr body;
  Span span;
};

// Parsed file with source order preserved.
struct SourceSpec {
  enum class ItemKind { Var, Formula, Game, Macro };
  struct Item {
    ItemKind kind;
    size_t index;
  };
  std::vector<Item> order;
  std::vector<VarDeclSyntax> vars;
  std::vector<FormulaBlockSyntax> formulas;
  std::vector<GameBlockSyntax> games;
  std::vector<MacroDefSyntax> macros;
};

struct ParseResult {
  std::optional<SourceSpec> spec;  // present when no errors
  std::vector<Diagnostic> diagnostics;
};

ParseResult parse_issy(const std::string& text);

// Replaces macro references by their bodies and removes the definitions.
// Macros may reference only earlier macros (D7).
struct ExpandResult {
  std::optional<SourceSpec> spec;
  std::vector<Diagnostic> diagnostics;
};
ExpandResult expand_macros(const SourceSpec& ast);

struct ElaborateResult {
  std::optional<Spec> spec;
  std::vector<Diagnostic> diagnostics;  // errors and warnings
};
ElaborateResult elaborate(const SourceSpec& ast);

// Whole-spec checks: at-most-one-non-safety, initial locations, reachability.
std::vector<Diagnostic> check_global(const Spec& spec);

// Convenience: full front-end pipeline.
struct FrontResult {
  std::optional<Spec> spec;
  std::vector<Diagnostic> diagnostics;
};
FrontResult load_issy(const std::string& text);

}  // namespace issy::front
