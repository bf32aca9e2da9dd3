#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <random>

#include "genutil.hpp"
#include "issy/logic.hpp"
#include "issy/subprocess.hpp"
#include "traceutil.hpp"

using namespace issy;
using namespace issy::logic;

namespace {

struct UseBundled {
  UseBundled() {
    setenv("ISSY_LTL_CMD", (self_exe_dir() + "/issy-ltl").c_str(), 1);
  }
} use_bundled;

VarEnv make_env() {
  VarEnv env;
  env.declare("add", VarKind::Input, Sort::Real);
  env.declare("x", VarKind::State, Sort::Int);
  env.declare("y", VarKind::State, Sort::Int);
  return env;
}

RpltlPtr add_leq0() {
  return lt::atom(tm::le(tm::var("add"), tm::constant(int64_t{0})));
}

}  // namespace

TEST_CASE("collect_atoms") {
  RpltlPtr f = lt::eventually(lt::globally(add_leq0()));
  AtomTable t = collect_atoms(f);
  REQUIRE(t.atoms.size() == 1);
  CHECK(structural_equal(t.atoms[0],
                         normalize(tm::le(tm::var("add"),
                                          tm::constant(int64_t{0})))));
  // repeated atom interns once
  AtomTable t2 = collect_atoms(lt::conj({add_leq0(), add_leq0()}));
  CHECK(t2.atoms.size() == 1);
  // constants are not propositions
  AtomTable t3 = collect_atoms(lt::truth());
  CHECK(t3.atoms.empty());
}

TEST_CASE("abstract_to_ltl") {
  RpltlPtr f = lt::eventually(lt::globally(add_leq0()));
  AtomTable t = collect_atoms(f);
  CHECK(abstract_to_ltl(f, t) == "F(G(p0))");

  RpltlPtr u = lt::until(
      lt::atom(tm::ge(tm::var("x"), tm::constant(int64_t{0}))),
      lt::atom(tm::ge(tm::var("y"), tm::constant(int64_t{0}))));
  AtomTable tu = collect_atoms(u);
  CHECK(abstract_to_ltl(u, tu) == "((p0) U (p1))");

  CHECK(abstract_to_ltl(lt::truth(), AtomTable{}) == "1");

  // missing atom
  CHECK_THROWS_AS(abstract_to_ltl(add_leq0(), AtomTable{}), MissingAtom);
}

TEST_CASE("translate_ltl through the subprocess") {
  std::string hoa_text = translate_ltl("1");
  hoa::Automaton a = hoa::parse_hoa(hoa_text);
  CHECK(a.num_states == 1);

  std::string hoa_g = translate_ltl("G p0");
  hoa::Automaton ag = hoa::parse_hoa(hoa_g);
  CHECK(ag.num_states == 2);

  CHECK_THROWS_AS(translate_ltl(""), TranslatorError);
  // outside the bundled fragment: error reported, not masked
  CHECK_THROWS_AS(translate_ltl("G((p0) -> ((p0) U (p1)))"), TranslatorError);
}

TEST_CASE("parse_hoa validation") {
  // overlapping labels
  std::string bad =
      "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"p0\"\nacc-name: Buchi\n"
      "Acceptance: 1 Inf(0)\n--BODY--\nState: 0\n[t] 0 {0}\n[0] 0 {0}\n"
      "--END--\n";
  CHECK_THROWS_AS(hoa::parse_hoa(bad), hoa::NondeterministicAutomaton);
  // disjoint + exhaustive passes
  std::string good =
      "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"p0\"\nacc-name: Buchi\n"
      "Acceptance: 1 Inf(0)\n--BODY--\nState: 0\n[0] 0 {0}\n[!0] 0\n"
      "--END--\n";
  hoa::Automaton a = hoa::parse_hoa(good);
  CHECK(a.num_states == 1);
  // incomplete
  std::string inc =
      "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"p0\"\nacc-name: Buchi\n"
      "Acceptance: 1 Inf(0)\n--BODY--\nState: 0\n[0] 0 {0}\n--END--\n";
  CHECK_THROWS_AS(hoa::parse_hoa(inc), hoa::NondeterministicAutomaton);
  // unsupported acceptance
  std::string rabin =
      "HOA: v1\nStates: 1\nStart: 0\nAP: 0\nacc-name: Rabin 1\n"
      "Acceptance: 2 (Fin(0) & Inf(1))\n--BODY--\nState: 0\n[t] 0\n"
      "--END--\n";
  CHECK_THROWS_AS(hoa::parse_hoa(rabin), hoa::UnsupportedAcceptance);
}

TEST_CASE("automaton_to_game") {
  VarEnv env = make_env();
  SUBCASE("one-state all-accepting") {
    hoa::Automaton a = hoa::parse_hoa(translate_ltl("1"));
    AtomTable t;
    SymbolicGame g = automaton_to_game(a, t, env);
    CHECK(g.locations.size() == 1);
    CHECK(g.locations[0].color == 1);
    CHECK(g.objective == WinCond::ParityMaxOdd);
    REQUIRE(g.transitions.size() == 1);
    CHECK(g.transitions[0].guard->is_true());
  }
  SUBCASE("G p0 concretized") {
    RpltlPtr f =
        lt::globally(lt::atom(tm::ge(tm::var("x"), tm::constant(int64_t{0}))));
    AtomTable t = collect_atoms(f);
    hoa::Automaton a = hoa::parse_hoa(translate_ltl(abstract_to_ltl(f, t)));
    SymbolicGame g = automaton_to_game(a, t, env);
    CHECK(g.locations.size() == 2);
    // the sink is entered exactly when the atom fails
    bool found_sink_guard = false;
    for (const auto& tr : g.transitions) {
      if (g.locations[tr.to].color == 0 && tr.from != tr.to) {
        found_sink_guard = true;
        CHECK(structural_equal(
            normalize(tr.guard),
            normalize(tm::neg(tm::ge(tm::var("x"),
                                     tm::constant(int64_t{0}))))));
      }
    }
    CHECK(found_sink_guard);
  }
  SUBCASE("missing atom") {
    hoa::Automaton a = hoa::parse_hoa(translate_ltl("G p0"));
    AtomTable empty;
    CHECK_THROWS_AS(automaton_to_game(a, empty, env), MissingAtom);
  }
}

TEST_CASE("formula_block_to_game") {
  VarEnv env = make_env();
  SUBCASE("empty block accepts everything") {
    SymbolicGame g = formula_block_to_game({}, {}, env);
    CHECK(g.locations.size() == 1);
    CHECK(g.locations[0].color % 2 == 1);
  }
  SUBCASE("safety assert") {
    RpltlPtr f =
        lt::globally(lt::atom(tm::eq(tm::var("x"), tm::constant(int64_t{0}))));
    SymbolicGame g = formula_block_to_game({}, {f}, env);
    CHECK(g.locations.size() == 2);
  }
}

TEST_CASE("language preservation at fragment scale") {
  // random RP-LTL in the bundled translator's fragment, random ultimately
  // periodic traces; the trace evaluator is the oracle
  VarEnv env;
  env.declare("i0", VarKind::Input, Sort::Int);
  env.declare("s0", VarKind::State, Sort::Int);
  env.declare("s1", VarKind::State, Sort::Int);

  std::mt19937 rng(20250808);
  std::uniform_int_distribution<int> val(-2, 2);
  std::uniform_int_distribution<int> len(1, 4);
  std::uniform_int_distribution<int> pick(0, 9);

  auto random_atom = [&]() {
    std::vector<std::string> vars = {"i0", "s0", "s1"};
    std::string v = vars[pick(rng) % 3];
    bool primed = v != "i0" && pick(rng) < 3;
    TermPtr lhs = tm::var(v, primed);
    TermPtr rhs = tm::constant(int64_t{val(rng)});
    switch (pick(rng) % 3) {
      case 0: return lt::atom(tm::le(lhs, rhs));
      case 1: return lt::atom(tm::ge(lhs, rhs));
      default: return lt::atom(tm::eq(lhs, rhs));
    }
  };
  // safety / GF-FG mixes (the fragment the bundled translator covers)
  std::function<RpltlPtr(int)> safety = [&](int d) -> RpltlPtr {
    if (d == 0) return random_atom();
    switch (pick(rng) % 5) {
      case 0: return lt::globally(safety(d - 1));
      case 1: return lt::weak_until(safety(d - 1), safety(d - 1));
      case 2: return lt::next(safety(d - 1));
      case 3: return lt::conj({safety(d - 1), safety(d - 1)});
      default: return lt::disj({safety(d - 1), safety(d - 1)});
    }
  };
  auto combo = [&]() -> RpltlPtr {
    RpltlPtr a = lt::globally(lt::eventually(random_atom()));
    RpltlPtr b = lt::eventually(lt::globally(random_atom()));
    switch (pick(rng) % 3) {
      case 0: return a;
      case 1: return b;
      default: return lt::disj({a, b});
    }
  };

  auto random_step = [&]() {
    test::Step st;
    st[{"i0", false}] = Value::of_int(Rational(val(rng)));
    st[{"s0", false}] = Value::of_int(Rational(val(rng)));
    st[{"s1", false}] = Value::of_int(Rational(val(rng)));
    return st;
  };

  int checked = 0;
  for (int round = 0; round < 60; ++round) {
    RpltlPtr f;
    switch (round % 3) {
      case 0: f = safety(2); break;
      case 1: f = combo(); break;
      default: f = lt::conj({safety(1), combo()}); break;
    }
    AtomTable table = collect_atoms(f);
    if (table.atoms.size() > 6) continue;
    std::string ltl = abstract_to_ltl(f, table);
    hoa::Automaton a;
    try {
      a = hoa::parse_hoa(translate_ltl(ltl));
    } catch (const TranslatorError&) {
      continue;  // outside the bundled fragment
    }
    for (int t = 0; t < 8; ++t) {
      test::Lasso w;
      int s = len(rng) - 1;
      for (int k = 0; k < s; ++k) w.stem.push_back(random_step());
      int l = len(rng);
      for (int k = 0; k < l; ++k) w.loop.push_back(random_step());
      bool direct = test::rpltl_holds(f, w);
      bool automaton = test::automaton_accepts(a, table, w);
      if (direct != automaton) {
        MESSAGE("mismatch: ", abstract_to_ltl(f, table));
      }
      REQUIRE(direct == automaton);
      ++checked;
    }
  }
  CHECK(checked >= 200);
}
