#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "issy/smtcore.hpp"

using namespace issy;
using smtcore::Verdict;

namespace {

smtcore::SymTab ints(std::initializer_list<const char*> names) {
  smtcore::SymTab t;
  for (const char* n : names) t[n] = Sort::Int;
  return t;
}

Verdict sat(const TermPtr& t, const smtcore::SymTab& syms) {
  return smtcore::check_sat({t}, syms, {}).verdict;
}

TermPtr c(int64_t n) { return tm::constant(n); }
TermPtr x() { return tm::var("x"); }
TermPtr y() { return tm::var("y"); }

}  // namespace

TEST_CASE("ground and simple sat") {
  auto t = ints({"x", "y"});
  CHECK(sat(tm::truth(), t) == Verdict::Sat);
  CHECK(sat(tm::falsity(), t) == Verdict::Unsat);
  CHECK(sat(tm::conj({tm::ge(x(), c(3)), tm::le(x(), c(1))}), t) ==
        Verdict::Unsat);
  CHECK(sat(tm::ge(x(), c(3)), t) == Verdict::Sat);
  CHECK(sat(tm::conj({tm::ge(x(), c(3)), tm::le(x(), c(3))}), t) ==
        Verdict::Sat);
}

TEST_CASE("models satisfy the assertions") {
  auto syms = ints({"x", "y"});
  TermPtr t = tm::conj({tm::gt(x(), c(2)), tm::lt(x(), c(5)),
                        tm::eq(y(), tm::add({x(), c(10)}))});
  auto r = smtcore::check_sat({t}, syms, {});
  REQUIRE(r.verdict == Verdict::Sat);
  Valuation v;
  for (const auto& [n, val] : r.model) v[{n, false}] = val;
  CHECK(eval_term(t, v).b);
}

TEST_CASE("divisibility via mod") {
  auto syms = ints({"x"});
  // x mod 4 = 2 && x > 100: sat
  TermPtr t = tm::conj(
      {tm::eq(tm::app(Op::Mod, {x(), c(4)}), c(2)), tm::gt(x(), c(100))});
  auto r = smtcore::check_sat({t}, syms, {});
  REQUIRE(r.verdict == Verdict::Sat);
  CHECK(Rational::euclid_mod(r.model.at("x").r.num(), 4) == 2);
  // x mod 2 = 0 && x mod 2 = 1: unsat
  TermPtr u = tm::conj({tm::eq(tm::app(Op::Mod, {x(), c(2)}), c(0)),
                        tm::eq(tm::app(Op::Mod, {x(), c(2)}), c(1))});
  CHECK(sat(u, syms) == Verdict::Unsat);
}

TEST_CASE("int quantifier elimination agrees with brute force") {
  // For linear-int terms over [-4,4]: qelim result equals quantifier
  // expansion on every valuation.
  std::mt19937 rng(20240811);
  std::uniform_int_distribution<int> coef(-3, 3);
  std::uniform_int_distribution<int> pick(0, 2);

  auto lin = [&](TermPtr a, TermPtr b) {
    return tm::add({tm::mul({c(coef(rng)), a}), tm::mul({c(coef(rng)), b}),
                    c(coef(rng))});
  };
  smtcore::SymTab syms = ints({"x", "q"});

  for (int round = 0; round < 60; ++round) {
    // random boolean structure over atoms in x (free) and q (quantified)
    auto atom = [&]() -> TermPtr {
      TermPtr s = lin(x(), tm::var("q"));
      switch (pick(rng)) {
        case 0: return tm::le(s, c(0));
        case 1: return tm::eq(s, c(0));
        default: return tm::gt(s, c(0));
      }
    };
    TermPtr body = pick(rng) == 0 ? tm::conj({atom(), atom()})
                                  : tm::disj({atom(), tm::neg(atom())});
    bool forall = pick(rng) == 1;
    TermPtr quant = forall ? tm::forall({{"q", Sort::Int}}, body)
                           : tm::exists({{"q", Sort::Int}}, body);

    auto qe = smtcore::eliminate_quantifiers(quant, ints({"x"}), {});
    REQUIRE(qe.complete);

    for (int xv = -4; xv <= 4; ++xv) {
      // brute force the quantifier over a wide range; coefficients are small
      // so witnesses live in a small window when they exist at all
      bool expect = forall;
      for (int qv = -40; qv <= 40; ++qv) {
        Valuation v;
        v[{"x", false}] = Value::of_int(Rational(xv));
        v[{"q", false}] = Value::of_int(Rational(qv));
        bool b = eval_term(body, v).b;
        if (forall)
          expect = expect && b;
        else
          expect = expect || b;
      }
      Valuation v;
      v[{"x", false}] = Value::of_int(Rational(xv));
      bool got = eval_term(qe.term, v).b;
      // the brute force window can miss far witnesses for exists(true)/
      // forall(false); only compare when the window is conclusive
      if (!forall && !expect) {
        // QE said sat => there is a witness somewhere; can't refute with a
        // bounded window. Verify the easy direction only.
        if (!got) CHECK(got == expect);
      } else if (forall && expect) {
        if (got) CHECK(got == expect);
      } else {
        CHECK(got == expect);
      }
    }
  }
}

TEST_CASE("real quantifier elimination") {
  smtcore::SymTab syms;
  syms["r"] = Sort::Real;
  // exists s. (s > r && s < r + 1)  ->  true
  TermPtr t = tm::exists(
      {{"s", Sort::Real}},
      tm::conj({tm::gt(tm::var("s"), tm::var("r")),
                tm::lt(tm::var("s"), tm::add({tm::var("r"), c(1)}))}));
  auto qe = smtcore::eliminate_quantifiers(t, syms, {});
  REQUIRE(qe.complete);
  CHECK(qe.term->is_true());
  // forall s. s >= r  ->  false
  TermPtr u = tm::forall({{"s", Sort::Real}},
                         tm::ge(tm::var("s"), tm::var("r")));
  auto qe2 = smtcore::eliminate_quantifiers(u, syms, {});
  REQUIRE(qe2.complete);
  CHECK(qe2.term->is_false());
  // strictness matters: exists s. (s > r && s < r) -> false
  TermPtr w = tm::exists({{"s", Sort::Real}},
                         tm::conj({tm::gt(tm::var("s"), tm::var("r")),
                                   tm::lt(tm::var("s"), tm::var("r"))}));
  auto qe3 = smtcore::eliminate_quantifiers(w, syms, {});
  REQUIRE(qe3.complete);
  CHECK(qe3.term->is_false());
}

TEST_CASE("one point rule example") {
  // exists x'. (x' = x + 1 && x' >= 0)  ->  x >= -1
  smtcore::SymTab syms = ints({"x"});
  TermPtr t = tm::exists(
      {{"xp", Sort::Int}},
      tm::conj({tm::eq(tm::var("xp"), tm::add({x(), c(1)})),
                tm::ge(tm::var("xp"), c(0))}));
  auto qe = smtcore::eliminate_quantifiers(t, syms, {});
  REQUIRE(qe.complete);
  for (int xv = -5; xv <= 5; ++xv) {
    Valuation v;
    v[{"x", false}] = Value::of_int(Rational(xv));
    CHECK(eval_term(qe.term, v).b == (xv >= -1));
  }
}

TEST_CASE("vacuous quantifier") {
  smtcore::SymTab syms = ints({"x"});
  TermPtr t = tm::forall({{"i", Sort::Int}}, tm::ge(x(), c(3)));
  auto qe = smtcore::eliminate_quantifiers(t, syms, {});
  REQUIRE(qe.complete);
  Valuation v;
  v[{"x", false}] = Value::of_int(Rational(5));
  CHECK(eval_term(qe.term, v).b);
  v[{"x", false}] = Value::of_int(Rational(0));
  CHECK(!eval_term(qe.term, v).b);
}

TEST_CASE("unbounded exists") {
  smtcore::SymTab syms = ints({"x"});
  // exists xp. xp >= x  -> true
  TermPtr t = tm::exists({{"xp", Sort::Int}}, tm::ge(tm::var("xp"), x()));
  auto qe = smtcore::eliminate_quantifiers(t, syms, {});
  REQUIRE(qe.complete);
  CHECK(qe.term->is_true());
}

TEST_CASE("boolean and mixed structure") {
  smtcore::SymTab syms;
  syms["p"] = Sort::Bool;
  syms["x"] = Sort::Int;
  TermPtr t = tm::exists(
      {{"qb", Sort::Bool}},
      tm::conj({tm::disj({tm::var("qb"), tm::var("p")}),
                tm::disj({tm::neg(tm::var("qb")), tm::ge(x(), c(0))})}));
  auto qe = smtcore::eliminate_quantifiers(t, syms, {});
  REQUIRE(qe.complete);
  // equivalent to p || x >= 0
  for (int xv : {-1, 1}) {
    for (bool pv : {false, true}) {
      Valuation v;
      v[{"x", false}] = Value::of_int(Rational(xv));
      v[{"p", false}] = Value::of_bool(pv);
      CHECK(eval_term(qe.term, v).b == (pv || xv >= 0));
    }
  }
}

TEST_CASE("ne literal needs its own boundary") {
  // x != 5 && x >= 5 && x <= 6 is sat (x = 6)
  smtcore::SymTab syms = ints({"x"});
  TermPtr t = tm::conj({tm::neg(tm::eq(x(), c(5))), tm::ge(x(), c(5)),
                        tm::le(x(), c(6))});
  auto r = smtcore::check_sat({t}, syms, {});
  REQUIRE(r.verdict == Verdict::Sat);
  CHECK(r.model.at("x").r == Rational(6));
}

TEST_CASE("timeout returns unknown") {
  smtcore::Budget b;
  b.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  smtcore::SymTab syms = ints({"x", "y", "z"});
  TermPtr big = tm::truth();
  for (int i = 0; i < 20; ++i)
    big = tm::conj({big, tm::le(tm::add({x(), y(), tm::var("z")}), c(i))});
  auto r = smtcore::check_sat({big}, syms, b);
  CHECK(r.verdict == Verdict::Unknown);
}
