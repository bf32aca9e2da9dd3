#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "issy/hoa.hpp"
#include "issy/ltlgen.hpp"

using namespace issy;
using namespace issy::ltlgen;

namespace {

Dpa translate_ok(const std::string& text) {
  auto f = parse_pltl(text);
  std::string why;
  auto d = translate(f, &why);
  INFO("formula: ", text, "; why: ", why);
  REQUIRE(d.has_value());
  return *d;
}

// random lasso over `aps` propositions
struct LassoGen {
  std::mt19937 rng;
  explicit LassoGen(uint32_t seed) : rng(seed) {}
  std::pair<std::vector<uint32_t>, std::vector<uint32_t>> lasso(size_t aps) {
    std::uniform_int_distribution<uint32_t> letter(0, (1u << aps) - 1);
    std::uniform_int_distribution<int> len(1, 4);
    std::vector<uint32_t> stem, loop;
    int s = len(rng) - 1;
    for (int i = 0; i < s; ++i) stem.push_back(letter(rng));
    int l = len(rng);
    for (int i = 0; i < l; ++i) loop.push_back(letter(rng));
    return {stem, loop};
  }
};

// cross-check automaton acceptance against direct lasso evaluation
void cross_check(const std::string& text, uint32_t seed, int rounds = 60) {
  auto f = parse_pltl(text);
  std::string why;
  auto d = translate(f, &why);
  INFO("formula: ", text, "; why: ", why);
  REQUIRE(d.has_value());
  // the emitted HOA must parse back deterministic & complete
  auto parsed = hoa::parse_hoa(to_hoa(*d));
  CHECK(parsed.num_states == d->num_states);

  LassoGen gen(seed);
  size_t aps = std::max<size_t>(d->ap_count, 1);
  for (int i = 0; i < rounds; ++i) {
    auto [stem, loop] = gen.lasso(aps);
    bool direct = eval_lasso(f, stem, loop);
    bool automaton = dpa_accepts(*d, stem, loop);
    if (direct != automaton) {
      MESSAGE("mismatch on ", text, " stem/loop sizes ", stem.size(), "/",
              loop.size());
    }
    REQUIRE(direct == automaton);
  }
}

}  // namespace

TEST_CASE("trivial formulas") {
  Dpa t = translate_ok("1");
  CHECK(t.num_states == 1);
  CHECK(dpa_accepts(t, {}, {0}));
  Dpa f = translate_ok("0");
  CHECK(!dpa_accepts(f, {}, {0}));
}

TEST_CASE("safety: G p0") {
  Dpa d = translate_ok("G p0");
  // stays accepting while p0 holds; sink once violated
  CHECK(dpa_accepts(d, {}, {1}));
  CHECK(!dpa_accepts(d, {1, 1}, {0}));
  CHECK(!dpa_accepts(d, {0}, {1}));
}

TEST_CASE("cosafety: p0 U p1") {
  Dpa d = translate_ok("(p0) U (p1)");
  CHECK(dpa_accepts(d, {1, 1, 2}, {0}));   // p0,p0,p1 then anything
  CHECK(!dpa_accepts(d, {}, {1}));         // p0 forever, never p1
  CHECK(dpa_accepts(d, {}, {3}));          // p1 immediately
}

TEST_CASE("listing1 shape: GF/FG combination") {
  // (F G p0) -> (F G (p1 & p2)) == G F !p0 | F G (p1 & p2)
  Dpa d = translate_ok("((F(G(p0))) -> (F(G((p1) & (p2)))))");
  // p0 always, p1&p2 always: accept
  CHECK(dpa_accepts(d, {}, {7}));
  // p0 always, p1&p2 never: reject
  CHECK(!dpa_accepts(d, {}, {1}));
  // p0 infinitely often false: assumption broken, accept
  CHECK(dpa_accepts(d, {}, {1, 0}));
}

TEST_CASE("fragment rejection") {
  // request/grant with U under G is outside the fragment
  auto f = parse_pltl("G((p0) -> ((p0) U (p1)))");
  std::string why;
  CHECK(!translate(f, &why).has_value());
  CHECK(!why.empty());
}

TEST_CASE("cross-validation against the lasso evaluator") {
  cross_check("G p0", 1);
  cross_check("F p0", 2);
  cross_check("(p0) U (p1)", 3);
  cross_check("(p0) W (p1)", 4);
  cross_check("(p0) R (p1)", 5);
  cross_check("X X p0", 6);
  cross_check("G(F(p0))", 7);
  cross_check("F(G(p0))", 8);
  cross_check("(G(F(p0))) | (F(G(p1)))", 9);
  cross_check("(G(F(p0))) & (G(F(p1)))", 10);
  cross_check("((F(G(p0))) -> (F(G((p1) & (p2)))))", 11);
  cross_check("(G(p0)) & (G(F(p1)))", 12);
  cross_check("(F(p0)) | (F(G(p1)))", 13);
  cross_check("(G((p0) | (X(p1)))) & (F(G(p1)))", 14);
  cross_check("(G(p0)) & (F(p1))", 15);
  cross_check("(G(p0)) | (F(p1))", 16);
  cross_check("((p0) U (p1)) | (G(F(p2)))", 17);
  cross_check("(!(p0)) W ((p1) & (p0))", 18);
  cross_check("(G(p0)) | (G(p1))", 19);
  cross_check("(F(p0)) & (F(p1))", 20);
}

TEST_CASE("random fragment formulas cross-validate") {
  std::mt19937 rng(424242);
  std::uniform_int_distribution<int> pick(0, 10);
  auto prop = [&](int depth) {
    std::string out;
    std::function<std::string(int)> go = [&](int d) -> std::string {
      if (d == 0 || pick(rng) < 4)
        return "p" + std::to_string(pick(rng) % 3);
      switch (pick(rng) % 3) {
        case 0: return "(!" + go(d - 1) + ")";
        case 1: return "(" + go(d - 1) + " & " + go(d - 1) + ")";
        default: return "(" + go(d - 1) + " | " + go(d - 1) + ")";
      }
    };
    return go(depth);
  };
  auto safety = [&](int depth) {
    std::function<std::string(int)> go = [&](int d) -> std::string {
      if (d == 0) return prop(1);
      switch (pick(rng) % 5) {
        case 0: return "(G " + go(d - 1) + ")";
        case 1: return "(" + go(d - 1) + " W " + go(d - 1) + ")";
        case 2: return "(X " + go(d - 1) + ")";
        case 3: return "(" + go(d - 1) + " & " + go(d - 1) + ")";
        default: return "(" + go(d - 1) + " | " + go(d - 1) + ")";
      }
    };
    return go(depth);
  };
  auto combo = [&]() {
    std::string a = "(G(F(" + prop(1) + ")))";
    std::string b = "(F(G(" + prop(1) + ")))";
    switch (pick(rng) % 3) {
      case 0: return a;
      case 1: return b;
      default: return "(" + a + " | " + b + ")";
    }
  };
  for (int round = 0; round < 40; ++round) {
    std::string f;
    switch (round % 3) {
      case 0: f = safety(2); break;
      case 1: f = combo(); break;
      default: f = "(" + safety(2) + " & " + combo() + ")"; break;
    }
    cross_check(f, 5000 + round, 40);
  }
}
