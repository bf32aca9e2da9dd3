#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "genutil.hpp"
#include "issy/frontend.hpp"
#include "issy/llissy.hpp"

using namespace issy;
using namespace issy::llissy;

namespace {

std::string corpus(const std::string& name) {
  std::ifstream in(std::string(TESTS_DIR) + "/corpus/" + name);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Spec parse_ok(const std::string& text) {
  auto r = parse_llissy(text);
  for (const auto& d : r.diagnostics) INFO(d.code, ": ", d.message);
  REQUIRE(r.spec.has_value());
  return std::move(*r.spec);
}

}  // namespace

TEST_CASE("empty spec is the canonical three empty lists") {
  Spec s;
  CHECK(emit_llissy(s) == "(() () ())\n");
  Spec back = parse_ok("(() () ())");
  CHECK(test::spec_equal(s, back));
}

TEST_CASE("vardec and formula rendering") {
  Spec s;
  s.env.declare("add", VarKind::Input, Sort::Real);
  s.env.declare("load1", VarKind::State, Sort::Real);
  FormulaBlock b;
  b.assumes.push_back(lt::eventually(lt::globally(
      lt::atom(tm::le(tm::var("add"), tm::constant(int64_t{0}))))));
  s.formulas.push_back(b);
  std::string text = emit_llissy(s);
  CHECK(text.find("(input Real add)") != std::string::npos);
  CHECK(text.find("(F (G (ap (<= add 0))))") != std::string::npos);
  Spec back = parse_ok(text);
  CHECK(test::spec_equal(s, back));
}

TEST_CASE("assumes come first in a formula spec") {
  std::string text =
      "((  (state Int x))"
      " (( ((ap (> x 0))) ((ap (= x 0))) ))"
      " ())";
  Spec s = parse_ok(text);
  REQUIRE(s.formulas.size() == 1);
  CHECK(s.formulas[0].assumes.size() == 1);
  CHECK(s.formulas[0].asserts.size() == 1);
  CHECK(s.formulas[0].assumes[0]->op == LtlOp::Atom);
}

TEST_CASE("unbalanced parenthesis") {
  auto r = parse_llissy("(()");
  CHECK(!r.spec.has_value());
  REQUIRE(!r.diagnostics.empty());
  CHECK(r.diagnostics[0].code == "UNBALANCED_PAREN");
}

TEST_CASE("implication lowering per D12") {
  Spec s;
  s.env.declare("x", VarKind::State, Sort::Int);
  FormulaBlock b;
  TermPtr a1 = tm::gt(tm::var("x"), tm::constant(int64_t{0}));
  TermPtr a2 = tm::eq(tm::var("x"), tm::constant(int64_t{1}));
  b.asserts.push_back(lt::implies(lt::atom(a1), lt::atom(a2)));
  s.formulas.push_back(b);
  std::string text = emit_llissy(s);
  CHECK(text.find("(or (not (ap (> x 0))) (ap (= x 1)))") !=
        std::string::npos);
}

TEST_CASE("round trip: parse(emit(s)) == s on 500 random specs") {
  for (uint32_t seed = 0; seed < 500; ++seed) {
    test::Gen gen(1000 + seed);
    Spec s = gen.spec();
    std::string text = emit_llissy(s);
    auto r = parse_llissy(text);
    if (!r.spec.has_value()) {
      for (const auto& d : r.diagnostics)
        MESSAGE("seed ", seed, ": ", d.code, ": ", d.message);
    }
    REQUIRE(r.spec.has_value());
    if (!test::spec_equal(s, *r.spec)) {
      MESSAGE("seed ", seed, " failed; text:\n", text);
      CHECK(false);
    }
  }
}

TEST_CASE("emit(parse(t)) == t on canonical text") {
  // canonicalization is a fixed point
  for (uint32_t seed = 0; seed < 50; ++seed) {
    test::Gen gen(9000 + seed);
    Spec s = gen.spec();
    std::string canon = emit_llissy(s);
    Spec back = parse_ok(canon);
    CHECK(emit_llissy(back) == canon);
  }
  // and on the compiled listing1
  auto fr = front::load_issy(corpus("listing1.issy"));
  REQUIRE(fr.spec.has_value());
  std::string canon = emit_llissy(*fr.spec);
  Spec back = parse_ok(canon);
  CHECK(emit_llissy(back) == canon);
  CHECK(test::spec_equal(*fr.spec, back));
}

TEST_CASE("emitted text newline and separator discipline") {
  test::Gen gen(77);
  Spec s = gen.spec();
  std::string text = emit_llissy(s);
  CHECK(text.back() == '\n');
  CHECK(text.find('\t') == std::string::npos);
  CHECK(text.find("\r") == std::string::npos);
  // two-space runs appear only as line indentation
  bool indent_only =
      text.find("  ") == std::string::npos ||
      text.find("\n  ") != std::string::npos;
  CHECK(indent_only);
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) {
      CHECK(line.back() != ' ');
      CHECK(line.back() != '\t');
    }
  }
}

TEST_CASE("comments and whitespace variants are accepted") {
  std::string text =
      "; a comment\n(\t(  (state Int x)\r\n)\n() ( ; another\n))";
  Spec s = parse_ok(text);
  CHECK(s.env.entries().size() == 1);
}

TEST_CASE("validation catches bad references and types") {
  // unknown location in transition
  auto r1 = parse_llissy(
      "(((state Int x)) () (( ((a 1 true)) ((a b true)) (a Safety) )))");
  CHECK(!r1.spec.has_value());
  // ill-typed guard
  auto r2 = parse_llissy(
      "(((state Int x)) () (( ((a 1 true)) ((a a (+ x true))) (a Safety) )))");
  CHECK(!r2.spec.has_value());
  // primed variable in domain
  auto r3 = parse_llissy(
      "(((state Int x)) () (( ((a 1 (= x~ 0))) () (a Safety) )))");
  CHECK(!r3.spec.has_value());
  // Reachability keyword tolerated exactly (D14 typo handled by tokenizer)
  auto r4 = parse_llissy(
      "(((state Int x)) () (( ((a 1 true)) ((a a true)) (a Reachability) )))");
  CHECK(r4.spec.has_value());
  // two non-safety components rejected
  auto r5 = parse_llissy(
      "(((state Int x)) () "
      "(( ((a 1 true)) ((a a true)) (a Buechi) )"
      " ( ((b 1 true)) ((b b true)) (b Buechi) )))");
  CHECK(!r5.spec.has_value());
}
