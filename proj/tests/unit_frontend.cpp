#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "issy/frontend.hpp"
#include "issy/logic.hpp"

using namespace issy;
using namespace issy::front;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string corpus(const std::string& name) {
  return slurp(std::string(TESTS_DIR) + "/corpus/" + name);
}

SourceSpec parse_ok(const std::string& text) {
  auto r = parse_issy(text);
  for (const auto& d : r.diagnostics)
    INFO(d.code, ": ", d.message, " at ", d.span.line, ":", d.span.col);
  REQUIRE(r.spec.has_value());
  return std::move(*r.spec);
}

Spec front_ok(const std::string& text) {
  auto r = load_issy(text);
  for (const auto& d : r.diagnostics)
    INFO(d.code, ": ", d.message, " at ", d.span.line, ":", d.span.col);
  REQUIRE(r.spec.has_value());
  return std::move(*r.spec);
}

}  // namespace

TEST_CASE("listing1 parses with the expected item counts") {
  SourceSpec s = parse_ok(corpus("listing1.issy"));
  CHECK(s.vars.size() == 6);
  CHECK(s.formulas.size() == 1);
  CHECK(s.macros.size() == 4);
  CHECK(s.games.size() == 1);
}

TEST_CASE("listing1 elaborates to the expected spec") {
  Spec s = front_ok(corpus("listing1.issy"));
  int inputs = 0, states = 0;
  for (const auto& e : s.env.entries())
    (e.kind == VarKind::Input ? inputs : states)++;
  CHECK(inputs == 2);
  CHECK(states == 4);
  REQUIRE(s.formulas.size() == 1);
  CHECK(s.formulas[0].assumes.size() == 1);
  CHECK(s.formulas[0].asserts.size() == 1);
  REQUIRE(s.games.size() == 1);
  const GameBlock& g = s.games[0];
  CHECK(g.wincond == WinCond::Safety);
  CHECK(g.initial == "init");
  CHECK(g.locations.size() == 5);
  CHECK(g.transitions.size() == 9);
  for (const auto& l : g.locations) {
    if (l.name == "err")
      CHECK(l.color == 0);
    else
      CHECK(l.color == 1);
  }
  // exactly one non-safety component (the formula block), so no errors
  auto diags = check_global(s);
  CHECK(!has_errors(diags));
}

TEST_CASE("missing identifier yields a positioned error") {
  auto r = parse_issy("input real");
  CHECK(!r.spec.has_value());
  REQUIRE(!r.diagnostics.empty());
  CHECK(r.diagnostics[0].span.line == 1);
}

TEST_CASE("empty input is an empty spec") {
  SourceSpec s = parse_ok("");
  CHECK(s.vars.empty());
  CHECK(s.formulas.empty());
  CHECK(s.games.empty());
  CHECK(s.macros.empty());
}

TEST_CASE("operator precedence") {
  // a && b || c parses as (a && b) || c
  SourceSpec s = parse_ok(
      "state bool a state bool b state bool c formula { assert a && b || c "
      "}");
  const SynPtr& f = s.formulas[0].stmts[0].formula;
  REQUIRE(f->kind == SynExpr::Kind::Binary);
  CHECK(f->op == "||");
  CHECK(f->kids[0]->op == "&&");

  // ! binds tighter than &&
  SourceSpec s2 = parse_ok(
      "state bool a state bool b formula { assert ! a && b }");
  const SynPtr& f2 = s2.formulas[0].stmts[0].formula;
  CHECK(f2->op == "&&");
  CHECK(f2->kids[0]->kind == SynExpr::Kind::Unary);

  // -> is right-associative and looser than ||
  SourceSpec s3 = parse_ok(
      "state bool a state bool b state bool c formula { assert a -> b -> c "
      "}");
  const SynPtr& f3 = s3.formulas[0].stmts[0].formula;
  CHECK(f3->op == "->");
  CHECK(f3->kids[1]->op == "->");

  // U right-assoc, between unary and &&: a U b U c == a U (b U c)
  SourceSpec s4 = parse_ok(
      "state bool a state bool b state bool c formula { assert a U b U c }");
  const SynPtr& f4 = s4.formulas[0].stmts[0].formula;
  CHECK(f4->op == "U");
  CHECK(f4->kids[1]->op == "U");

  // F a && b == (F a) && b
  SourceSpec s5 = parse_ok(
      "state bool a state bool b formula { assert F a && b }");
  CHECK(s5.formulas[0].stmts[0].formula->op == "&&");

  // arithmetic: abs > mul > add > cmp
  SourceSpec s6 = parse_ok(
      "state int x formula { assert [1 + 2 * x = 3] }");
  const SynPtr& p = s6.formulas[0].stmts[0].formula->kids[0];
  CHECK(p->op == "=");
  CHECK(p->kids[0]->op == "+");
  CHECK(p->kids[0]->kids[1]->op == "*");
}

TEST_CASE("macro expansion") {
  // !balanced expands to the negated disjunction
  SourceSpec s = parse_ok(
      "state int x def pos = [x > 0] game Safety from a { loc a 1 from a to "
      "a with !pos }");
  auto e = expand_macros(s);
  REQUIRE(e.spec.has_value());
  CHECK(e.spec->macros.empty());
  const SynPtr& g = e.spec->games[0].trans[0].guard;
  REQUIRE(g->kind == SynExpr::Kind::Unary);
  CHECK(g->kids[0]->kind == SynExpr::Kind::Pred);

  // no macros: expansion is identity in shape
  SourceSpec s2 = parse_ok("state int x game Safety from a { loc a 1 }");
  auto e2 = expand_macros(s2);
  REQUIRE(e2.spec.has_value());
  CHECK(e2.spec->games.size() == 1);

  // def a = a is cyclic
  auto r3 = parse_issy("def a = [a > 0]");
  REQUIRE(r3.spec.has_value());
  auto e3 = expand_macros(*r3.spec);
  CHECK(!e3.spec.has_value());
  REQUIRE(!e3.diagnostics.empty());
  CHECK(e3.diagnostics[0].code == "CYCLIC_MACRO");

  // expansion is idempotent on its own output
  auto e4 = expand_macros(*e.spec);
  REQUIRE(e4.spec.has_value());
  CHECK(e4.spec->games[0].trans.size() == e.spec->games[0].trans.size());
}

TEST_CASE("macro in pred must be atomic") {
  auto r = parse_issy(
      "state int x def two = [x > 0] && [x < 5] def use = [two + 1]");
  REQUIRE(r.spec.has_value());
  auto e = expand_macros(*r.spec);
  CHECK(!e.spec.has_value());
  bool found = false;
  for (const auto& d : e.diagnostics)
    if (d.code == "MACRO_IN_PRED_NOT_ATOMIC") found = true;
  CHECK(found);
}

TEST_CASE("keep and havoc elaborate per D8") {
  Spec s = front_ok(
      "state int a state int b game Safety from l { loc l 1 from l to l "
      "with keep(a b) }");
  TermPtr guard = s.games[0].transitions[0].guard;
  TermPtr expect = tm::conj({tm::eq(tm::var("a", true), tm::var("a")),
                             tm::eq(tm::var("b", true), tm::var("b"))});
  CHECK(structural_equal(guard, expect));

  Spec s2 = front_ok(
      "state int a game Safety from l { loc l 1 from l to l with havoc(a) "
      "}");
  CHECK(s2.games[0].transitions[0].guard->is_true());
}

TEST_CASE("elaboration errors") {
  // primed input in guard
  auto r = load_issy(
      "input int i state int x game Safety from l { loc l 1 from l to l "
      "with [i' = 0] }");
  CHECK(!r.spec.has_value());
  bool primed = false;
  for (const auto& d : r.diagnostics)
    if (d.code == "PRIMED_INPUT") primed = true;
  CHECK(primed);

  // default color warns
  auto r2 = load_issy("state int x game Safety from l { loc l }");
  REQUIRE(r2.spec.has_value());
  bool warned = false;
  for (const auto& d : r2.diagnostics)
    if (d.code == "DEFAULT_COLOR" &&
        d.severity == Diagnostic::Severity::Warning)
      warned = true;
  CHECK(warned);
  CHECK(r2.spec->games[0].locations[0].color == 1);

  // unknown location
  auto r3 = load_issy(
      "state int x game Safety from l { loc l 1 from l to nowhere with true "
      "}");
  CHECK(!r3.spec.has_value());

  // duplicate locations
  auto r4 = load_issy("state int x game Safety from l { loc l 1 loc l 2 }");
  CHECK(!r4.spec.has_value());

  // reserved suffix (D11)
  auto r5 = parse_issy("state int x__p");
  CHECK(!r5.spec.has_value());
}

TEST_CASE("check_global rules") {
  // two Buechi games: MULTIPLE_NONSAFETY
  auto r = load_issy(
      "state int x "
      "game Buechi from a { loc a 1 from a to a with true } "
      "game Buechi from b { loc b 1 from b to b with true }");
  CHECK(!r.spec.has_value());
  bool multi = false;
  for (const auto& d : r.diagnostics)
    if (d.code == "MULTIPLE_NONSAFETY") multi = true;
  CHECK(multi);

  // only safety games: fine
  auto r2 = load_issy(
      "state int x "
      "game Safety from a { loc a 1 from a to a with true } "
      "game Safety from b { loc b 1 from b to b with true }");
  CHECK(r2.spec.has_value());

  // unreachable location warning
  auto r3 = load_issy(
      "state int x game Safety from a { loc a 1 loc b 1 from a to a with "
      "true from b to b with true }");
  REQUIRE(r3.spec.has_value());
  bool unreachable = false;
  for (const auto& d : r3.diagnostics)
    if (d.code == "UNREACHABLE_LOCATION") unreachable = true;
  CHECK(unreachable);
}

TEST_CASE("is_syntactic_safety") {
  auto atom = [](const char* v) {
    return lt::atom(tm::eq(tm::var(v), tm::constant(int64_t{0})));
  };
  CHECK(logic::is_syntactic_safety(lt::globally(atom("x"))));
  CHECK(!logic::is_syntactic_safety(
      lt::eventually(lt::globally(atom("x")))));
  CHECK(logic::is_syntactic_safety(lt::weak_until(atom("x"), atom("y"))));
  CHECK(!logic::is_syntactic_safety(lt::until(atom("x"), atom("y"))));
  // G under negation flips
  CHECK(!logic::is_syntactic_safety(lt::neg(lt::globally(atom("x")))));
  CHECK(logic::is_syntactic_safety(lt::neg(lt::eventually(atom("x")))));
}

TEST_CASE("diagnostic spans stay in bounds") {
  std::vector<std::string> bad = {
      "input real",
      "game Safety from x {",
      "formula { assert }",
      "state int x formula { assert [x + ] }",
      "def = [x]",
      "state int x game Safety from a { loc a 1 from a with true }",
      "/* unterminated",
      "state int x formula { assert [x > 0] U }",
  };
  for (const auto& text : bad) {
    auto r = parse_issy(text);
    CHECK(!r.spec.has_value());
    REQUIRE(!r.diagnostics.empty());
    for (const auto& d : r.diagnostics) {
      CHECK(d.span.offset <= text.size());
      CHECK(d.span.line >= 1);
      CHECK(d.span.col >= 1);
    }
  }
}
