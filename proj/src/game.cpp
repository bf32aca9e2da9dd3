#include "issy/game.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "issy/smt.hpp"

namespace issy {

std::optional<size_t> SymbolicGame::find_location(
    const std::string& name) const {
  for (size_t i = 0; i < locations.size(); ++i)
    if (locations[i].name == name) return i;
  return std::nullopt;
}

std::vector<const SymbolicGame::Transition*> SymbolicGame::out(
    size_t loc) const {
  std::vector<const Transition*> res;
  for (const auto& t : transitions)
    if (t.from == loc) res.push_back(&t);
  return res;
}

SymbolicGame from_game_block(const VarEnv& env, const GameBlock& block) {
  SymbolicGame g;
  g.env = env;
  g.objective = block.wincond;
  std::map<std::string, size_t> index;
  for (const auto& l : block.locations) {
    index[l.name] = g.locations.size();
    g.locations.push_back({l.name, l.color, l.domain});
  }
  for (const auto& t : block.transitions) {
    auto f = index.find(t.from);
    auto to = index.find(t.to);
    if (f == index.end() || to == index.end())
      throw std::invalid_argument("transition endpoint not declared");
    g.transitions.push_back({f->second, to->second, t.guard});
  }
  auto init = index.find(block.initial);
  if (init == index.end())
    throw std::invalid_argument("initial location not declared");
  g.initial = init->second;
  return g;
}

SymbolicGame trivial_game(const VarEnv& env) {
  SymbolicGame g;
  g.env = env;
  g.objective = WinCond::Safety;
  g.locations.push_back({"top", 1, tm::truth()});
  g.transitions.push_back({0, 0, tm::truth()});
  g.initial = 0;
  return g;
}

namespace {

bool is_non_safety(const SymbolicGame& g) {
  return g.objective != WinCond::Safety;
}

// Sink color losing for the system under the product objective (D17).
uint64_t losing_sink_color(WinCond objective, uint64_t max_color) {
  switch (objective) {
    case WinCond::Safety:
    case WinCond::Reachability:
    case WinCond::Buechi:
    case WinCond::CoBuechi:
      return 0;
    case WinCond::ParityMaxOdd: {
      uint64_t c = max_color;
      if (c % 2 == 1) ++c;  // smallest even >= all colors
      return c;
    }
  }
  return 0;
}

}  // namespace

SymbolicGame product(const SymbolicGame& g1, const SymbolicGame& g2) {
  if (!(g1.env == g2.env)) throw EnvMismatch();
  bool ns1 = is_non_safety(g1);
  bool ns2 = is_non_safety(g2);
  if (ns1 && ns2) throw MultipleNonSafety();

  SymbolicGame out;
  out.env = g1.env;
  out.objective = ns1 ? g1.objective : (ns2 ? g2.objective : WinCond::Safety);

  uint64_t max_color = 0;
  const SymbolicGame& lead = ns2 ? g2 : g1;  // color source
  for (const auto& l : lead.locations) max_color = std::max(max_color, l.color);
  uint64_t sink_color = losing_sink_color(out.objective, max_color);

  // A pair is bad when a safety component sits on one of its color-0
  // locations: entering it is redirected to the sink.
  auto bad_pair = [&](size_t l1, size_t l2) {
    bool b1 = g1.objective == WinCond::Safety && g1.locations[l1].color == 0;
    bool b2 = g2.objective == WinCond::Safety && g2.locations[l2].color == 0;
    // When both are safety games, the color source is g1; a 0-color on the
    // lead side is equally unsafe.
    return b1 || b2;
  };

  std::map<std::pair<size_t, size_t>, size_t> index;
  std::vector<std::pair<size_t, size_t>> work;
  std::optional<size_t> sink;

  auto ensure_sink = [&]() {
    if (!sink) {
      sink = out.locations.size();
      out.locations.push_back({"sink", sink_color, tm::truth()});
      out.transitions.push_back({*sink, *sink, tm::truth()});
    }
    return *sink;
  };

  auto intern = [&](size_t l1, size_t l2) -> size_t {
    if (bad_pair(l1, l2)) return ensure_sink();
    auto key = std::make_pair(l1, l2);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    size_t id = out.locations.size();
    index[key] = id;
    const auto& loc1 = g1.locations[l1];
    const auto& loc2 = g2.locations[l2];
    uint64_t color = ns2 ? loc2.color : loc1.color;
    if (!ns1 && !ns2) {
      // both safety: safe iff both safe; bad pairs never reach here
      color = 1;
    }
    out.locations.push_back(
        {loc1.name + "." + loc2.name, color,
         normalize(tm::conj({loc1.domain, loc2.domain}))});
    work.push_back(key);
    return id;
  };

  size_t init = intern(g1.initial, g2.initial);
  out.initial = init;

  while (!work.empty()) {
    auto [l1, l2] = work.back();
    work.pop_back();
    size_t from = index.at({l1, l2});
    for (const auto* t1 : g1.out(l1)) {
      for (const auto* t2 : g2.out(l2)) {
        TermPtr guard = normalize(tm::conj({t1->guard, t2->guard}));
        if (guard->is_false()) continue;
        size_t to = intern(t1->to, t2->to);
        out.transitions.push_back({from, to, guard});
      }
    }
  }
  return out;
}

SymbolicGame prune_unsat_transitions(const SymbolicGame& g,
                                     smt::SmtSession& session) {
  SymbolicGame out;
  out.env = g.env;
  out.objective = g.objective;
  out.locations = g.locations;

  std::vector<const SymbolicGame::Transition*> live;
  for (const auto& t : g.transitions) {
    TermPtr fire = normalize(tm::conj(
        {t.guard, g.locations[t.from].domain,
         apply_priming(g.locations[t.to].domain, PrimeDirection::PrimeAll,
                       g.env)}));
    if (fire->is_false()) continue;
    try {
      auto r = session.check_sat({fire}, g.env);
      if (r.verdict == smt::SatResult::Verdict::Unsat) continue;
    } catch (const smt::BackendError&) {
      // keep the transition; pruning is an optimization only
    }
    live.push_back(&t);
  }

  // locations reachable over live transitions
  std::set<size_t> reach{g.initial};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto* t : live)
      if (reach.count(t->from) && reach.insert(t->to).second) grew = true;
  }
  std::map<size_t, size_t> remap;
  std::vector<SymbolicGame::Location> keep_locs;
  for (size_t i = 0; i < g.locations.size(); ++i) {
    if (!reach.count(i)) continue;
    remap[i] = keep_locs.size();
    keep_locs.push_back(g.locations[i]);
  }
  out.locations = std::move(keep_locs);
  out.initial = remap.at(g.initial);
  for (const auto* t : live) {
    if (!reach.count(t->from) || !reach.count(t->to)) continue;
    out.transitions.push_back({remap.at(t->from), remap.at(t->to), t->guard});
  }
  return out;
}

std::vector<Diagnostic> validate(const SymbolicGame& g,
                                 smt::SmtSession* session) {
  std::vector<Diagnostic> out;
  std::set<size_t> has_out;
  for (const auto& t : g.transitions) has_out.insert(t.from);
  for (size_t i = 0; i < g.locations.size(); ++i)
    if (!has_out.count(i))
      out.push_back(Diagnostic::warning(
          "DEADEND", "location '" + g.locations[i].name +
                         "' has no outgoing transition (the system loses "
                         "there)"));

  std::set<size_t> seen{g.initial};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& t : g.transitions)
      if (seen.count(t.from) && seen.insert(t.to).second) grew = true;
  }
  for (size_t i = 0; i < g.locations.size(); ++i)
    if (!seen.count(i))
      out.push_back(Diagnostic::warning(
          "UNREACHABLE", "location '" + g.locations[i].name +
                             "' is unreachable from the initial location"));

  if (session) {
    for (const auto& t : g.transitions) {
      try {
        auto r = session->check_sat({t.guard}, g.env);
        if (r.verdict == smt::SatResult::Verdict::Unsat)
          out.push_back(Diagnostic::warning(
              "UNSAT_GUARD", "transition " + g.locations[t.from].name +
                                 " -> " + g.locations[t.to].name +
                                 " has an unsatisfiable guard"));
      } catch (const smt::BackendError&) {
        break;  // best effort only
      }
    }
  }
  return out;
}

}  // namespace issy
