#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <random>

#include "fixtures.hpp"
#include "issy/extract.hpp"
#include "simharness.hpp"

using namespace issy;
using namespace issy::extract;
using solver::GameSolver;
using solver::SolveOutcome;

namespace {

struct UseBundled {
  UseBundled() {
    std::string cmd = self_exe_dir() + "/issy-smt";
    setenv("ISSY_SMT_CMD", cmd.c_str(), 1);
  }
} use_bundled;

AbstractProgram extract_of(const SymbolicGame& g, smt::SmtSession& s,
                           SolveOutcome* out_outcome = nullptr) {
  GameSolver solver(g, s);
  SolveOutcome out = solver.solve();
  REQUIRE(out.verdict == SolveOutcome::Verdict::Realizable);
  if (out_outcome) *out_outcome = out;
  return extract_strategy(g, out, s);
}

}  // namespace

TEST_CASE("loop program compiles and stays put") {
  smt::SmtSession s;
  SymbolicGame g = test::g_loop();
  AbstractProgram p = extract_of(g, s);
  std::string src = emit_c(p);
  bool has_loop = src.find("while") != std::string::npos ||
                  src.find("for (;;)") != std::string::npos;
  CHECK(has_loop);
  std::string log;
  std::string bin = test::compile_c(src, "loop", &log);
  INFO("compiler said: ", log);
  REQUIRE(!bin.empty());

  std::vector<std::vector<Value>> rounds(20);  // input-free: ticks
  auto sim = test::run_controller(bin, {Value::of_int(Rational(5))}, rounds,
                                  1);
  REQUIRE(sim.ok);
  REQUIRE(sim.trace.size() == 21);  // initial + 20 steps
  for (const auto& st : sim.trace) CHECK(st.loc == "a");
}

TEST_CASE("decrement program reaches the target") {
  smt::SmtSession s;
  SymbolicGame g = test::g_dec();
  SolveOutcome outcome;
  AbstractProgram p = extract_of(g, s, &outcome);
  REQUIRE(!outcome.lemmas.empty());
  std::string src = emit_c(p);
  std::string log;
  std::string bin = test::compile_c(src, "dec", &log);
  INFO("compiler said: ", log);
  REQUIRE(!bin.empty());

  // start at x = 9: must reach b within x + slack steps, decrementing by
  // >= 1 while looping at a
  std::vector<std::vector<Value>> rounds(40);
  auto sim = test::run_controller(bin, {Value::of_int(Rational(9))}, rounds,
                                  1);
  REQUIRE(sim.ok);
  bool reached = false;
  int64_t prev_x = 9;
  for (size_t i = 0; i < sim.trace.size(); ++i) {
    const auto& st = sim.trace[i];
    if (st.loc == "b") {
      reached = true;
      break;
    }
    int64_t x = st.state[0].r.num();
    if (i > 0 && x > 0) {
      // while descending at a, the lemma rank (x) strictly decreases
      CHECK(x <= prev_x);
    }
    prev_x = x;
  }
  CHECK(reached);
}

TEST_CASE("non-assignment-like winning transition is rejected") {
  // only winning move has guard x' > x
  smt::SmtSession s;
  SymbolicGame g;
  g.env.declare("x", VarKind::State, Sort::Int);
  g.objective = WinCond::Reachability;
  g.locations.push_back({"a", 0, tm::truth()});
  g.locations.push_back({"b", 1, tm::truth()});
  g.transitions.push_back(
      {0, 1, tm::gt(tm::var("x", true), tm::var("x"))});
  g.transitions.push_back({1, 1, tm::eq(tm::var("x", true), tm::var("x"))});
  g.initial = 0;
  GameSolver solver(g, s);
  auto out = solver.solve();
  REQUIRE(out.verdict == SolveOutcome::Verdict::Realizable);
  CHECK_THROWS_AS(extract_strategy(g, out, s), ExtractUnsupported);
}

TEST_CASE("not realizable outcomes are rejected") {
  smt::SmtSession s;
  SymbolicGame g = test::g_trap();
  GameSolver solver(g, s);
  auto out = solver.solve();
  REQUIRE(out.verdict == SolveOutcome::Verdict::Unrealizable);
  CHECK_THROWS_AS(extract_strategy(g, out, s), NotRealizable);
}

TEST_CASE("real-valued program uses doubles") {
  smt::SmtSession s;
  SymbolicGame g;
  g.env.declare("r", VarKind::State, Sort::Real);
  g.objective = WinCond::Safety;
  g.locations.push_back({"a", 1, tm::truth()});
  g.transitions.push_back(
      {0, 0, tm::eq(tm::var("r", true),
                    tm::constant(Rational(1, 2)))});
  g.initial = 0;
  AbstractProgram p = extract_of(g, s);
  std::string src = emit_c(p);
  CHECK(src.find("double r") != std::string::npos);
  CHECK(src.find("%lf") != std::string::npos);
  std::string log;
  std::string bin = test::compile_c(src, "realprog", &log);
  INFO("compiler said: ", log);
  CHECK(!bin.empty());
}

TEST_CASE("simulation soundness on random environments") {
  smt::SmtSession s;
  SymbolicGame g = test::g_in();
  g.locations[0].domain = tm::ge(tm::var("x"), tm::constant(int64_t{3}));
  SolveOutcome outcome;
  AbstractProgram p = extract_of(g, s, &outcome);
  std::string log;
  std::string bin = test::compile_c(emit_c(p), "gin", &log);
  REQUIRE(!bin.empty());

  std::mt19937 rng(7);
  std::uniform_int_distribution<int> input(-8, 8);
  for (int run = 0; run < 20; ++run) {
    int64_t x0 = 3 + (run % 5);
    std::vector<std::vector<Value>> rounds;
    for (int i = 0; i < 50; ++i)
      rounds.push_back({Value::of_int(Rational(input(rng)))});
    auto sim = test::run_controller(bin, {Value::of_int(Rational(x0))},
                                    rounds, 1);
    REQUIRE(sim.ok);
    bool reached = false;
    for (const auto& st : sim.trace)
      if (st.loc == "b") reached = true;
    CHECK(reached);
  }
}
