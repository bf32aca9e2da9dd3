#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "issy/terms.hpp"

using namespace issy;

namespace {

VarEnv make_env() {
  VarEnv env;
  env.declare("add", VarKind::Input, Sort::Real);
  env.declare("i", VarKind::Input, Sort::Int);
  env.declare("b", VarKind::Input, Sort::Bool);
  env.declare("load1", VarKind::State, Sort::Real);
  env.declare("x", VarKind::State, Sort::Int);
  env.declare("p", VarKind::State, Sort::Bool);
  return env;
}

}  // namespace

TEST_CASE("typecheck basics") {
  VarEnv env = make_env();
  // (<= add 0) : Bool
  CHECK(typecheck(tm::le(tm::var("add"), tm::constant(int64_t{0})), env) ==
        Sort::Bool);
  CHECK(typecheck(tm::truth(), env) == Sort::Bool);
  // (+ true 1) -> SortError
  CHECK_THROWS_AS(
      typecheck(tm::add({tm::truth(), tm::constant(int64_t{1})}), env),
      SortError);
  // numerals float: add : Real mixes with numeral 0
  CHECK(typecheck(tm::add({tm::var("add"), tm::constant(int64_t{1})}), env) ==
        Sort::Real);
  // hard Int/Real mix rejected
  CHECK_THROWS_AS(
      typecheck(tm::add({tm::var("add"), tm::var("x")}), env), SortError);
  // mod on Int ok, on Real rejected
  CHECK(typecheck(tm::app(Op::Mod, {tm::var("x"), tm::constant(int64_t{3})}),
                  env) == Sort::Int);
  CHECK_THROWS_AS(typecheck(tm::app(Op::Mod, {tm::var("add"),
                                              tm::constant(int64_t{3})}),
                            env),
                  SortError);
  // division requires constant divisor
  CHECK(typecheck(tm::app(Op::Div, {tm::var("load1"),
                                    tm::constant(int64_t{2})}),
                  env) == Sort::Real);
  CHECK_THROWS_AS(
      typecheck(tm::app(Op::Div, {tm::var("load1"), tm::var("load1")}), env),
      SortError);
  CHECK_THROWS_AS(typecheck(tm::var("nope"), env), UnknownVariable);
  CHECK_THROWS_AS(typecheck(tm::var("add", true), env), PrimedInput);
}

TEST_CASE("substitute") {
  VarEnv env = make_env();
  // substitute(x' = x - 1, {x' -> 0}) -> (0 = x - 1)
  TermPtr t = tm::eq(tm::var("x", true),
                     tm::sub(tm::var("x"), tm::constant(int64_t{1})));
  auto s = substitute(t, {{{"x", true}, tm::constant(int64_t{0})}});
  CHECK(structural_equal(
      s, tm::eq(tm::constant(int64_t{0}),
                tm::sub(tm::var("x"), tm::constant(int64_t{1})))));
  // identity
  CHECK(structural_equal(substitute(tm::var("x"), {}), tm::var("x")));
  // x+y with x -> y
  TermPtr xy = tm::add({tm::var("x"), tm::var("i")});
  auto r = substitute(xy, {{{"x", false}, tm::var("i")}});
  CHECK(structural_equal(r, tm::add({tm::var("i"), tm::var("i")})));
  // typecheck preserved under sort-matching substitution
  CHECK(typecheck(r, env) == typecheck(xy, env));
}

TEST_CASE("apply_priming") {
  VarEnv env = make_env();
  TermPtr t = tm::eq(tm::var("load1"), tm::constant(int64_t{0}));
  TermPtr primed = apply_priming(t, PrimeDirection::PrimeAll, env);
  CHECK(structural_equal(
      primed, tm::eq(tm::var("load1", true), tm::constant(int64_t{0}))));
  // inputs never primed
  TermPtr u = tm::le(tm::var("add"), tm::constant(int64_t{0}));
  CHECK(structural_equal(apply_priming(u, PrimeDirection::PrimeAll, env), u));
  // unprime
  TermPtr v = tm::ge(tm::var("x", true), tm::constant(int64_t{3}));
  CHECK(structural_equal(
      apply_priming(v, PrimeDirection::UnprimeAll, env),
      tm::ge(tm::var("x"), tm::constant(int64_t{3}))));
  // round trip on prime-free terms
  TermPtr w = tm::conj({t, u});
  CHECK(structural_equal(
      apply_priming(apply_priming(w, PrimeDirection::PrimeAll, env),
                    PrimeDirection::UnprimeAll, env),
      w));
}

TEST_CASE("normalize") {
  // and(true, x >= 0) -> x >= 0
  TermPtr ge0 = tm::ge(tm::var("x"), tm::constant(int64_t{0}));
  CHECK(structural_equal(normalize(tm::conj({tm::truth(), ge0})), ge0));
  // not not p -> p
  CHECK(structural_equal(normalize(tm::neg(tm::neg(tm::var("p")))),
                         tm::var("p")));
  // 1 + 2 <= x -> 3 <= x
  TermPtr folded = normalize(
      tm::le(tm::add({tm::constant(int64_t{1}), tm::constant(int64_t{2})}),
             tm::var("x")));
  CHECK(structural_equal(folded, tm::le(tm::constant(int64_t{3}),
                                        tm::var("x"))));
  // constant comparisons decide
  CHECK(normalize(tm::lt(tm::constant(int64_t{1}), tm::constant(int64_t{2})))
            ->is_true());
  // bound subsumption in conjunction
  TermPtr two_bounds = tm::conj(
      {tm::le(tm::var("x"), tm::constant(int64_t{3})),
       tm::le(tm::var("x"), tm::constant(int64_t{5}))});
  CHECK(structural_equal(normalize(two_bounds),
                         tm::le(tm::var("x"), tm::constant(int64_t{3}))));
}

TEST_CASE("eval") {
  Valuation v;
  v[{"x", false}] = Value::of_int(Rational(4));
  v[{"x", true}] = Value::of_int(Rational(3));
  v[{"b", false}] = Value::of_bool(true);
  TermPtr t = tm::conj({tm::var("b"),
                        tm::eq(tm::var("x", true),
                               tm::sub(tm::var("x"), tm::constant(int64_t{1})))});
  CHECK(eval_term(t, v).b);
  TermPtr m = tm::app(Op::Mod, {tm::sub(tm::constant(int64_t{0}),
                                        tm::constant(int64_t{7})),
                                tm::constant(int64_t{3})});
  CHECK(eval_term(m, v).r == Rational(2));  // Euclidean: -7 mod 3 = 2
}

TEST_CASE("serialize smt2") {
  CHECK(serialize_smt2(tm::le(tm::var("add"), tm::constant(int64_t{0}))) ==
        "(<= add 0)");
  CHECK(serialize_smt2(tm::eq(tm::var("x", true),
                              tm::add({tm::var("x"),
                                       tm::constant(int64_t{1})}))) ==
        "(= x__p (+ x 1))");
  CHECK(serialize_smt2(tm::truth()) == "true");
  CHECK(serialize_smt2(tm::constant(Rational(-1, 2))) == "(- (/ 1 2))");
}
