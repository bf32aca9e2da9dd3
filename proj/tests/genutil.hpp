// Random well-typed specs, formulas, and games for round-trip and oracle
// tests. Deterministic for a fixed seed.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "issy/game.hpp"
#include "issy/spec.hpp"

namespace issy::test {

struct Gen {
  std::mt19937 rng;
  explicit Gen(uint32_t seed) : rng(seed) {}

  int pick(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  }
  bool coin() { return pick(0, 1) == 1; }

  // --- environments ----------------------------------------------------------

  VarEnv small_env() {
    VarEnv env;
    int n_in = pick(0, 2);
    int n_st = pick(1, 3);
    const Sort sorts[] = {Sort::Bool, Sort::Int, Sort::Real};
    for (int i = 0; i < n_in; ++i)
      env.declare("i" + std::to_string(i), VarKind::Input, sorts[pick(0, 2)]);
    for (int i = 0; i < n_st; ++i)
      env.declare("s" + std::to_string(i), VarKind::State, sorts[pick(0, 2)]);
    return env;
  }

  // --- terms -------------------------------------------------------------------

  TermPtr numeric_const(Sort s) {
    if (s == Sort::Int) return tm::constant(int64_t{pick(-4, 4)});
    switch (pick(0, 3)) {
      case 0: return tm::constant(int64_t{pick(-4, 4)});
      case 1: return tm::constant(Rational(pick(1, 9), 10));  // decimals
      case 2: return tm::constant(Rational(pick(1, 5), 3));   // (/ p q) form
      default: return tm::constant(Rational(pick(-7, 7), 2));
    }
  }

  // numeric expression of the given sort over selected variables
  TermPtr numeric_expr(const std::vector<VarEnv::Entry>& vars, Sort s,
                       bool allow_primed, const VarEnv& env, int depth = 2) {
    std::vector<VarEnv::Entry> fit;
    for (const auto& v : vars)
      if (v.sort == s) fit.push_back(v);
    if (fit.empty() || depth == 0 || pick(0, 3) == 0) {
      if (!fit.empty() && pick(0, 2) > 0) {
        const auto& v = fit[pick(0, static_cast<int>(fit.size()) - 1)];
        bool primed =
            allow_primed && v.kind == VarKind::State && coin();
        return tm::var(v.name, primed);
      }
      return numeric_const(s);
    }
    switch (pick(0, 2)) {
      case 0:
        return tm::add({numeric_expr(fit, s, allow_primed, env, depth - 1),
                        numeric_expr(fit, s, allow_primed, env, depth - 1)});
      case 1:
        return tm::sub(numeric_expr(fit, s, allow_primed, env, depth - 1),
                       numeric_expr(fit, s, allow_primed, env, depth - 1));
      default:
        return tm::mul({numeric_const(s),
                        numeric_expr(fit, s, allow_primed, env, depth - 1)});
    }
  }

  // well-typed Bool term; when state_only, only unprimed state variables
  TermPtr bool_term(const VarEnv& env, bool allow_primed, bool state_only,
                    int depth = 2) {
    std::vector<VarEnv::Entry> vars;
    for (const auto& e : env.entries()) {
      if (state_only && e.kind != VarKind::State) continue;
      vars.push_back(e);
    }
    if (depth == 0 || pick(0, 4) == 0) {
      // leaf: bool var, constant, or comparison
      std::vector<VarEnv::Entry> bools;
      for (const auto& v : vars)
        if (v.sort == Sort::Bool) bools.push_back(v);
      if (!bools.empty() && pick(0, 2) == 0) {
        const auto& v = bools[pick(0, static_cast<int>(bools.size()) - 1)];
        bool primed = allow_primed && v.kind == VarKind::State && coin();
        return tm::var(v.name, primed);
      }
      if (pick(0, 5) == 0) return coin() ? tm::truth() : tm::falsity();
      Sort s = coin() ? Sort::Int : Sort::Real;
      TermPtr a = numeric_expr(vars, s, allow_primed, env, 1);
      TermPtr b = numeric_expr(vars, s, allow_primed, env, 1);
      switch (pick(0, 4)) {
        case 0: return tm::eq(a, b);
        case 1: return tm::le(a, b);
        case 2: return tm::lt(a, b);
        case 3: return tm::ge(a, b);
        default: return tm::gt(a, b);
      }
    }
    switch (pick(0, 3)) {
      case 0:
        return tm::conj({bool_term(env, allow_primed, state_only, depth - 1),
                         bool_term(env, allow_primed, state_only, depth - 1)});
      case 1:
        return tm::disj({bool_term(env, allow_primed, state_only, depth - 1),
                         bool_term(env, allow_primed, state_only, depth - 1)});
      case 2:
        return tm::neg(bool_term(env, allow_primed, state_only, depth - 1));
      default:
        return tm::implies(
            bool_term(env, allow_primed, state_only, depth - 1),
            bool_term(env, allow_primed, state_only, depth - 1));
    }
  }

  // --- RP-LTL ---------------------------------------------------------------------

  RpltlPtr rpltl(const VarEnv& env, int depth = 3, bool safety_only = false) {
    if (depth == 0 || pick(0, 3) == 0)
      return lt::atom(bool_term(env, /*allow_primed=*/true, false, 1));
    if (safety_only) {
      switch (pick(0, 5)) {
        case 0:
          return lt::conj({rpltl(env, depth - 1, true),
                           rpltl(env, depth - 1, true)});
        case 1:
          return lt::disj({rpltl(env, depth - 1, true),
                           rpltl(env, depth - 1, true)});
        case 2: return lt::next(rpltl(env, depth - 1, true));
        case 3: return lt::globally(rpltl(env, depth - 1, true));
        case 4:
          return lt::weak_until(rpltl(env, depth - 1, true),
                                rpltl(env, depth - 1, true));
        default:
          return lt::release(rpltl(env, depth - 1, true),
                             rpltl(env, depth - 1, true));
      }
    }
    // stays in the LLissy <FORMULA> fragment (no ->/<->, which emit lowers
    // per D12)
    switch (pick(0, 8)) {
      case 0: return lt::neg(rpltl(env, depth - 1));
      case 1:
        return lt::conj({rpltl(env, depth - 1), rpltl(env, depth - 1)});
      case 2:
        return lt::disj({rpltl(env, depth - 1), rpltl(env, depth - 1)});
      case 3: return lt::next(rpltl(env, depth - 1));
      case 4: return lt::eventually(rpltl(env, depth - 1));
      case 5: return lt::globally(rpltl(env, depth - 1));
      case 6:
        return lt::until(rpltl(env, depth - 1), rpltl(env, depth - 1));
      case 7:
        return lt::release(rpltl(env, depth - 1), rpltl(env, depth - 1));
      default:
        return lt::weak_until(rpltl(env, depth - 1), rpltl(env, depth - 1));
    }
  }

  // --- whole specs -----------------------------------------------------------------

  Spec spec() {
    Spec s;
    s.env = small_env();
    // at most one non-safety component overall
    bool non_safety_used = false;
    int n_formulas = pick(0, 2);
    for (int i = 0; i < n_formulas; ++i) {
      FormulaBlock b;
      bool force_safety = non_safety_used || coin();
      if (force_safety) {
        int n = pick(1, 2);
        for (int j = 0; j < n; ++j)
          b.asserts.push_back(rpltl(s.env, 2, /*safety_only=*/true));
      } else {
        non_safety_used = true;
        int na = pick(0, 1);
        for (int j = 0; j < na; ++j)
          b.assumes.push_back(rpltl(s.env, 2));
        int ng = pick(1, 2);
        for (int j = 0; j < ng; ++j)
          b.asserts.push_back(rpltl(s.env, 2));
      }
      s.formulas.push_back(std::move(b));
    }
    int n_games = pick(0, 2);
    if (n_formulas == 0 && n_games == 0) n_games = 1;
    for (int i = 0; i < n_games; ++i) {
      GameBlock g;
      if (!non_safety_used && pick(0, 2) == 0) {
        non_safety_used = true;
        const WinCond wcs[] = {WinCond::Reachability, WinCond::Buechi,
                               WinCond::CoBuechi, WinCond::ParityMaxOdd};
        g.wincond = wcs[pick(0, 3)];
      } else {
        g.wincond = WinCond::Safety;
      }
      int n_locs = pick(1, 3);
      for (int l = 0; l < n_locs; ++l) {
        GameLocation loc;
        loc.name = "l" + std::to_string(i) + "_" + std::to_string(l);
        loc.color = static_cast<uint64_t>(pick(0, 3));
        loc.domain = coin() ? tm::truth()
                            : bool_term(s.env, false, /*state_only=*/true, 1);
        g.locations.push_back(std::move(loc));
      }
      if (g.wincond == WinCond::Safety) {
        // keep at least one safe location so check_global stays quiet
        g.locations[0].color = 1;
      }
      g.initial = g.locations[0].name;
      int n_trans = pick(1, 4);
      for (int t = 0; t < n_trans; ++t) {
        GameTransition tr;
        tr.from = g.locations[pick(0, n_locs - 1)].name;
        tr.to = g.locations[pick(0, n_locs - 1)].name;
        tr.guard = bool_term(s.env, /*allow_primed=*/true, false, 2);
        g.transitions.push_back(std::move(tr));
      }
      // keep every location reachable to avoid warnings in strict checks
      for (int l = 1; l < n_locs; ++l) {
        GameTransition tr;
        tr.from = g.locations[0].name;
        tr.to = g.locations[l].name;
        tr.guard = tm::truth();
        g.transitions.push_back(std::move(tr));
      }
      s.games.push_back(std::move(g));
    }
    return s;
  }
};

// --- structural spec equality --------------------------------------------------

inline bool spec_equal(const Spec& a, const Spec& b) {
  if (!(a.env == b.env)) return false;
  if (a.formulas.size() != b.formulas.size()) return false;
  for (size_t i = 0; i < a.formulas.size(); ++i) {
    const auto& fa = a.formulas[i];
    const auto& fb = b.formulas[i];
    if (fa.assumes.size() != fb.assumes.size() ||
        fa.asserts.size() != fb.asserts.size())
      return false;
    for (size_t j = 0; j < fa.assumes.size(); ++j)
      if (!rpltl_equal(fa.assumes[j], fb.assumes[j])) return false;
    for (size_t j = 0; j < fa.asserts.size(); ++j)
      if (!rpltl_equal(fa.asserts[j], fb.asserts[j])) return false;
  }
  if (a.games.size() != b.games.size()) return false;
  for (size_t i = 0; i < a.games.size(); ++i) {
    const auto& ga = a.games[i];
    const auto& gb = b.games[i];
    if (ga.wincond != gb.wincond || ga.initial != gb.initial) return false;
    if (ga.locations.size() != gb.locations.size() ||
        ga.transitions.size() != gb.transitions.size())
      return false;
    for (size_t j = 0; j < ga.locations.size(); ++j) {
      if (ga.locations[j].name != gb.locations[j].name ||
          ga.locations[j].color != gb.locations[j].color ||
          !structural_equal(ga.locations[j].domain, gb.locations[j].domain))
        return false;
    }
    for (size_t j = 0; j < ga.transitions.size(); ++j) {
      if (ga.transitions[j].from != gb.transitions[j].from ||
          ga.transitions[j].to != gb.transitions[j].to ||
          !structural_equal(ga.transitions[j].guard, gb.transitions[j].guard))
        return false;
    }
  }
  return true;
}

}  // namespace issy::test
