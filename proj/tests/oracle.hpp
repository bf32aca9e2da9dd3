// Explicit-state oracle for finite-range games: enumerates (location,
// valuation) states, resolves the environment-then-system move rule by brute
// force, and solves safety/reachability by fixpoints and parity by the
// classical recursive algorithm on the explicit graph. Entirely independent
// of the symbolic solving path it validates.
#pragma once

#include <map>
#include <set>
#include <vector>

#include "issy/game.hpp"
#include "issy/solver.hpp"

namespace issy::test {

struct FiniteOracle {
  const SymbolicGame& g;
  int lo = 0, hi = 7;        // state variable range
  int ilo = -10, ihi = 10;   // input witness window (covers all behaviors of
                             // the guard template pool)

  std::vector<std::string> state_vars;
  std::vector<std::string> input_vars;
  size_t vals_per_loc = 1;
  size_t n_states = 0;  // locations * valuations

  // moves[s][w] = explicit successor states (empty = system stuck)
  std::vector<std::vector<std::vector<size_t>>> moves;

  explicit FiniteOracle(const SymbolicGame& game) : g(game) {
    for (const auto& e : g.env.entries()) {
      if (e.sort != Sort::Int)
        throw std::runtime_error("oracle supports Int variables only");
      (e.kind == VarKind::State ? state_vars : input_vars).push_back(e.name);
    }
    vals_per_loc = 1;
    for (size_t i = 0; i < state_vars.size(); ++i)
      vals_per_loc *= static_cast<size_t>(hi - lo + 1);
    n_states = g.locations.size() * vals_per_loc;
    build();
  }

  size_t id(size_t loc, size_t val_index) const {
    return loc * vals_per_loc + val_index;
  }
  size_t loc_of(size_t s) const { return s / vals_per_loc; }
  size_t val_of(size_t s) const { return s % vals_per_loc; }

  std::vector<int> decode(size_t val_index) const {
    std::vector<int> out(state_vars.size());
    size_t range = static_cast<size_t>(hi - lo + 1);
    for (size_t i = 0; i < state_vars.size(); ++i) {
      out[i] = lo + static_cast<int>(val_index % range);
      val_index /= range;
    }
    return out;
  }

  Valuation valuation(size_t s) const {
    Valuation v;
    std::vector<int> xs = decode(val_of(s));
    for (size_t i = 0; i < state_vars.size(); ++i)
      v[{state_vars[i], false}] = Value::of_int(Rational(xs[i]));
    return v;
  }

  bool in_domain(size_t s) const {
    Valuation v = valuation(s);
    return eval_term(g.locations[loc_of(s)].domain, v).b;
  }

  size_t n_inputs() const {
    size_t w = 1;
    for (size_t i = 0; i < input_vars.size(); ++i)
      w *= static_cast<size_t>(ihi - ilo + 1);
    return w;
  }

  void add_inputs(Valuation& v, size_t w) const {
    size_t range = static_cast<size_t>(ihi - ilo + 1);
    for (size_t i = 0; i < input_vars.size(); ++i) {
      v[{input_vars[i], false}] = Value::of_int(Rational(
          ilo + static_cast<int>(w % range)));
      w /= range;
    }
  }

  void build() {
    size_t W = n_inputs();
    moves.assign(n_states, {});
    for (size_t s = 0; s < n_states; ++s) {
      moves[s].assign(W, {});
      if (!in_domain(s)) continue;
      size_t loc = loc_of(s);
      Valuation base = valuation(s);
      for (size_t w = 0; w < W; ++w) {
        Valuation v = base;
        add_inputs(v, w);
        std::set<size_t> succ;
        for (const auto& t : g.transitions) {
          if (t.from != loc) continue;
          for (size_t nv = 0; nv < vals_per_loc; ++nv) {
            size_t target = id(t.to, nv);
            if (!in_domain(target)) continue;
            Valuation full = v;
            std::vector<int> xs = decode(nv);
            for (size_t i = 0; i < state_vars.size(); ++i)
              full[{state_vars[i], true}] =
                  Value::of_int(Rational(xs[i]));
            if (eval_term(t.guard, full).b) succ.insert(target);
          }
        }
        moves[s][w].assign(succ.begin(), succ.end());
      }
    }
  }

  // states from which the system can force the next state into X for every
  // input choice
  std::vector<bool> cpre_sys(const std::vector<bool>& x) const {
    std::vector<bool> out(n_states, false);
    for (size_t s = 0; s < n_states; ++s) {
      if (!in_domain(s)) continue;
      bool ok = true;
      for (const auto& per_input : moves[s]) {
        bool any = false;
        for (size_t t : per_input)
          if (x[t]) {
            any = true;
            break;
          }
        if (!any) {
          ok = false;
          break;
        }
      }
      out[s] = ok;
    }
    return out;
  }

  std::vector<bool> safe_states() const {
    std::vector<bool> out(n_states, false);
    for (size_t s = 0; s < n_states; ++s)
      out[s] = in_domain(s) && g.locations[loc_of(s)].color > 0;
    return out;
  }

  std::vector<bool> solve_safety() const {
    std::vector<bool> x = safe_states();
    for (;;) {
      std::vector<bool> pre = cpre_sys(x);
      std::vector<bool> next(n_states);
      bool changed = false;
      for (size_t s = 0; s < n_states; ++s) {
        next[s] = x[s] && pre[s] && g.locations[loc_of(s)].color > 0 &&
                  in_domain(s);
        if (next[s] != x[s]) changed = true;
      }
      if (!changed) return x;
      x = next;
    }
  }

  std::vector<bool> solve_reach() const {
    std::vector<bool> x = safe_states();  // color>0 = target
    for (;;) {
      std::vector<bool> pre = cpre_sys(x);
      bool changed = false;
      for (size_t s = 0; s < n_states; ++s) {
        if (!x[s] && pre[s] && in_domain(s)) {
          x[s] = true;
          changed = true;
        }
      }
      if (!changed) return x;
    }
  }

  // --- parity (max odd) on the explicit bipartite graph ----------------------

  // nodes: [0, n_states) environment-owned; then one system node per
  // (state, input); dead ends route to a color-0 limbo pair.
  struct ParityGraph {
    size_t n_env;
    size_t n_nodes;
    std::vector<std::vector<size_t>> succ;
    std::vector<std::vector<size_t>> pred;
    std::vector<uint64_t> color;
    std::vector<bool> sys_owned;
  };

  ParityGraph parity_graph(const std::vector<uint64_t>& loc_colors) const {
    ParityGraph pg;
    size_t W = n_inputs();
    pg.n_env = n_states;
    size_t limbo_env = n_states + n_states * W;
    size_t limbo_sys = limbo_env + 1;
    pg.n_nodes = limbo_sys + 1;
    pg.succ.assign(pg.n_nodes, {});
    pg.pred.assign(pg.n_nodes, {});
    pg.color.assign(pg.n_nodes, 0);
    pg.sys_owned.assign(pg.n_nodes, false);

    auto sys_id = [&](size_t s, size_t w) { return n_states + s * W + w; };
    for (size_t s = 0; s < n_states; ++s) {
      pg.color[s] = in_domain(s) ? loc_colors[loc_of(s)] : 0;
      for (size_t w = 0; w < W; ++w) {
        size_t m = sys_id(s, w);
        pg.sys_owned[m] = true;
        pg.succ[s].push_back(m);
        if (moves[s][w].empty()) {
          pg.succ[m].push_back(limbo_env);  // stuck: the system loses
        } else {
          for (size_t t : moves[s][w]) pg.succ[m].push_back(t);
        }
      }
    }
    pg.succ[limbo_env].push_back(limbo_sys);
    pg.sys_owned[limbo_sys] = true;
    pg.succ[limbo_sys].push_back(limbo_env);
    for (size_t n = 0; n < pg.n_nodes; ++n)
      for (size_t t : pg.succ[n]) pg.pred[t].push_back(n);
    return pg;
  }

  // attractor of `target` for the system (p=true) or environment inside
  // `alive`
  static std::vector<bool> attr(const ParityGraph& pg, bool sys_player,
                                const std::vector<bool>& target,
                                const std::vector<bool>& alive) {
    std::vector<bool> in = target;
    std::vector<size_t> queue;
    std::vector<size_t> out_count(pg.n_nodes, 0);
    for (size_t n = 0; n < pg.n_nodes; ++n) {
      if (!alive[n]) continue;
      for (size_t t : pg.succ[n])
        if (alive[t]) ++out_count[n];
      if (in[n] && alive[n]) queue.push_back(n);
    }
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      size_t n = queue[qi];
      for (size_t m : pg.pred[n]) {
        if (!alive[m] || in[m]) continue;
        bool mine = pg.sys_owned[m] == sys_player;
        if (mine) {
          in[m] = true;
          queue.push_back(m);
        } else {
          if (--out_count[m] == 0) {
            in[m] = true;
            queue.push_back(m);
          }
        }
      }
    }
    return in;
  }

  static void zielonka(const ParityGraph& pg, std::vector<bool> alive,
                       std::vector<bool>& win_sys,
                       std::vector<bool>& win_env) {
    bool any = false;
    uint64_t maxc = 0;
    for (size_t n = 0; n < pg.n_nodes; ++n)
      if (alive[n]) {
        any = true;
        maxc = std::max(maxc, pg.color[n]);
      }
    if (!any) return;
    bool p_sys = maxc % 2 == 1;

    std::vector<bool> target(pg.n_nodes, false);
    for (size_t n = 0; n < pg.n_nodes; ++n)
      target[n] = alive[n] && pg.color[n] == maxc;
    std::vector<bool> a = attr(pg, p_sys, target, alive);
    for (size_t n = 0; n < pg.n_nodes; ++n) a[n] = a[n] && alive[n];

    std::vector<bool> rest = alive;
    for (size_t n = 0; n < pg.n_nodes; ++n)
      if (a[n]) rest[n] = false;
    std::vector<bool> ws(pg.n_nodes, false), we(pg.n_nodes, false);
    zielonka(pg, rest, ws, we);

    std::vector<bool>& opp = p_sys ? we : ws;
    bool opp_empty = true;
    for (size_t n = 0; n < pg.n_nodes; ++n)
      if (opp[n]) opp_empty = false;
    if (opp_empty) {
      auto& mine = p_sys ? win_sys : win_env;
      for (size_t n = 0; n < pg.n_nodes; ++n)
        if (alive[n]) mine[n] = true;
      return;
    }
    std::vector<bool> b = attr(pg, !p_sys, opp, alive);
    for (size_t n = 0; n < pg.n_nodes; ++n) b[n] = b[n] && alive[n];
    std::vector<bool> rest2 = alive;
    for (size_t n = 0; n < pg.n_nodes; ++n)
      if (b[n]) rest2[n] = false;
    std::vector<bool> ws2(pg.n_nodes, false), we2(pg.n_nodes, false);
    zielonka(pg, rest2, ws2, we2);
    for (size_t n = 0; n < pg.n_nodes; ++n) {
      win_sys[n] = ws2[n];
      win_env[n] = we2[n];
    }
    auto& oppw = p_sys ? win_env : win_sys;
    for (size_t n = 0; n < pg.n_nodes; ++n)
      if (b[n]) oppw[n] = true;
  }

  std::vector<bool> solve_parity(const std::vector<uint64_t>& colors) const {
    ParityGraph pg = parity_graph(colors);
    std::vector<bool> alive(pg.n_nodes, true);
    std::vector<bool> ws(pg.n_nodes, false), we(pg.n_nodes, false);
    zielonka(pg, alive, ws, we);
    return {ws.begin(), ws.begin() + static_cast<long>(n_states)};
  }

  std::vector<bool> solve(WinCond objective) const {
    switch (objective) {
      case WinCond::Safety:
        return solve_safety();
      case WinCond::Reachability:
        return solve_reach();
      case WinCond::Buechi: {
        std::vector<uint64_t> colors;
        for (const auto& l : g.locations)
          colors.push_back(l.color > 0 ? 1 : 0);
        return solve_parity(colors);
      }
      case WinCond::CoBuechi: {
        std::vector<uint64_t> colors;
        for (const auto& l : g.locations)
          colors.push_back(l.color > 0 ? 1 : 2);
        return solve_parity(colors);
      }
      case WinCond::ParityMaxOdd: {
        std::vector<uint64_t> colors;
        for (const auto& l : g.locations) colors.push_back(l.color);
        return solve_parity(colors);
      }
    }
    return {};
  }

  // realizable iff every in-domain initial valuation is winning
  bool realizable(const std::vector<bool>& win) const {
    for (size_t nv = 0; nv < vals_per_loc; ++nv) {
      size_t s = id(g.initial, nv);
      if (!in_domain(s)) continue;
      if (!win[s]) return false;
    }
    return true;
  }

  // evaluate a symbolic region at each explicit state
  std::vector<bool> region_states(const solver::Region& r) const {
    std::vector<bool> out(n_states, false);
    for (size_t s = 0; s < n_states; ++s) {
      if (!in_domain(s)) continue;
      out[s] = eval_term(r.at(loc_of(s)), valuation(s)).b;
    }
    return out;
  }
};

}  // namespace issy::test
