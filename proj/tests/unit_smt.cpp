// Exercises the SMT-LIB2 subprocess protocol against the bundled backend.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "issy/smt.hpp"
#include "issy/subprocess.hpp"

using namespace issy;
using smt::SmtSession;
using smt::Tri;

namespace {

// Tests run against the bundled solver regardless of the host machine.
struct UseBundled {
  UseBundled() {
    std::string cmd = self_exe_dir() + "/issy-smt";
    setenv("ISSY_SMT_CMD", cmd.c_str(), 1);
  }
} use_bundled;

VarEnv make_env() {
  VarEnv env;
  env.declare("i", VarKind::Input, Sort::Int);
  env.declare("x", VarKind::State, Sort::Int);
  env.declare("r", VarKind::State, Sort::Real);
  env.declare("p", VarKind::State, Sort::Bool);
  return env;
}

TermPtr c(int64_t n) { return tm::constant(n); }

}  // namespace

TEST_CASE("check_sat verdicts") {
  VarEnv env = make_env();
  SmtSession s;
  // [x >= 3, x <= 1] -> Unsat
  auto r1 = s.check_sat(
      {tm::ge(tm::var("x"), c(3)), tm::le(tm::var("x"), c(1))}, env);
  CHECK(r1.verdict == smt::SatResult::Verdict::Unsat);
  // [x >= 3] -> Sat with a model that satisfies the assertions
  auto r2 = s.check_sat({tm::ge(tm::var("x"), c(3))}, env);
  REQUIRE(r2.verdict == smt::SatResult::Verdict::Sat);
  REQUIRE(r2.model.has_value());
  CHECK(eval_term(tm::ge(tm::var("x"), c(3)), *r2.model).b);
  // [] -> Sat
  auto r3 = s.check_sat({}, env);
  CHECK(r3.verdict == smt::SatResult::Verdict::Sat);
}

TEST_CASE("model covers primed and real variables") {
  VarEnv env = make_env();
  SmtSession s;
  TermPtr t = tm::conj({tm::eq(tm::var("x", true), tm::add({tm::var("x"), c(1)})),
                        tm::gt(tm::var("r"), c(0)),
                        tm::lt(tm::var("r"), c(1)), tm::var("p")});
  auto r = s.check_sat({t}, env);
  REQUIRE(r.verdict == smt::SatResult::Verdict::Sat);
  REQUIRE(r.model.has_value());
  CHECK(eval_term(t, *r.model).b);
  CHECK(r.model->count({"x", true}) == 1);
}

TEST_CASE("check_implies") {
  VarEnv env = make_env();
  SmtSession s;
  CHECK(s.check_implies(tm::ge(tm::var("x"), c(3)),
                        tm::ge(tm::var("x"), c(0)), env) == Tri::True);
  CHECK(s.check_implies(tm::ge(tm::var("x"), c(0)),
                        tm::ge(tm::var("x"), c(3)), env) == Tri::False);
  TermPtr p = tm::var("p");
  CHECK(s.check_implies(p, p, env) == Tri::True);
}

TEST_CASE("qelim through the wire") {
  VarEnv env = make_env();
  SmtSession s;
  // exists x'. (x' = x + 1 && x' >= 0)  ->  x >= -1
  TermPtr t = tm::exists(
      {{"xp", Sort::Int}},
      tm::conj({tm::eq(tm::var("xp"), tm::add({tm::var("x"), c(1)})),
                tm::ge(tm::var("xp"), c(0))}));
  auto q = s.qelim(t, env);
  REQUIRE(q.eliminated);
  CHECK(!has_quantifier(q.term));
  // semantics: equivalent to x >= -1 on a few points
  for (int xv = -3; xv <= 1; ++xv) {
    Valuation v;
    v[{"x", false}] = Value::of_int(Rational(xv));
    CHECK(eval_term(q.term, v).b == (xv >= -1));
  }
  // vacuous forall
  auto q2 = s.qelim(tm::forall({{"k", Sort::Int}}, tm::ge(tm::var("x"), c(3))),
                    env);
  REQUIRE(q2.eliminated);
  // exists xp. xp >= x -> true
  auto q3 = s.qelim(tm::exists({{"xp", Sort::Int}},
                               tm::ge(tm::var("xp"), tm::var("x"))),
                    env);
  REQUIRE(q3.eliminated);
  CHECK(q3.term->is_true());
}

TEST_CASE("serialize round trips through the backend") {
  VarEnv env = make_env();
  SmtSession s;
  // Anything serialized must re-parse on the solver side: assert + check-sat.
  std::vector<TermPtr> probes = {
      tm::le(tm::var("i"), c(0)),
      tm::eq(tm::var("x", true), tm::add({tm::var("x"), c(1)})),
      tm::conj({tm::var("p"), tm::gt(tm::var("r"), tm::constant(Rational(1, 2)))}),
      tm::disj({tm::neg(tm::var("p")),
                tm::eq(tm::app(Op::Mod, {tm::var("x"), c(3)}), c(2))}),
      tm::app(Op::Ite, {tm::var("p"), tm::var("x"), c(0)}),
  };
  for (const auto& probe : probes) {
    TermPtr wrapped = probe;
    if (typecheck(probe, env) != Sort::Bool)
      wrapped = tm::ge(probe, c(-1000));
    auto r = s.check_sat({wrapped}, env);
    CHECK(r.verdict != smt::SatResult::Verdict::Unknown);
  }
}

TEST_CASE("session survives a timeout-ish restart") {
  VarEnv env = make_env();
  smt::SolverConfig cfg;
  cfg.query_timeout_ms = 4000;
  SmtSession s(cfg);
  auto r1 = s.check_sat({tm::ge(tm::var("x"), c(0))}, env);
  CHECK(r1.verdict == smt::SatResult::Verdict::Sat);
  auto r2 = s.check_sat({tm::falsity()}, env);
  CHECK(r2.verdict == smt::SatResult::Verdict::Unsat);
}
