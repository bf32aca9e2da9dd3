#include "issy/solver.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>

namespace issy::solver {

using smt::Tri;

Region Region::bottom(size_t n) {
  Region r;
  r.per_loc.assign(n, tm::falsity());
  return r;
}

Region Region::top(size_t n) {
  Region r;
  r.per_loc.assign(n, tm::truth());
  return r;
}

GameSolver::GameSolver(const SymbolicGame& game, smt::SmtSession& session,
                       SolveOptions opts)
    : game_(game), session_(session), opts_(std::move(opts)) {
  restriction_.assign(game_.locations.size(), tm::truth());
}

void GameSolver::charge(int n) {
  steps_used_ += n;
  if (steps_used_ > opts_.iteration_budget) throw Bail{"budget"};
  if (expired()) throw Bail{"timeout"};
}

bool GameSolver::expired() const {
  return std::chrono::steady_clock::now() >= opts_.deadline;
}

TermPtr GameSolver::domain_of(size_t loc) const {
  return normalize(
      tm::conj({game_.locations[loc].domain, restriction_[loc]}));
}

// Regions accrete disjuncts every iteration; implied ones otherwise snowball
// into every later backend query. Single accumulative pass: weakest (widest)
// disjuncts first, each later one dropped when the kept disjunction already
// covers it.
TermPtr GameSolver::prune_disjuncts(TermPtr t) {
  t = normalize(t);
  if (!t->is_app(Op::Or) || t->args.size() < 2 || t->args.size() > 1024)
    return t;
  std::vector<TermPtr> sorted = t->args;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TermPtr& a, const TermPtr& b) {
                     return term_size(a) < term_size(b);
                   });
  std::vector<TermPtr> kept;
  for (const auto& d : sorted) {
    if (!kept.empty()) {
      Tri covered = session_.check_implies(d, tm::disj(kept), game_.env);
      if (covered == Tri::True) continue;
    }
    kept.push_back(d);
  }
  // tightening pass: earlier disjuncts may be covered by the final union
  if (kept.size() >= 2 && kept.size() <= 24) {
    for (size_t i = 0; i < kept.size() && kept.size() > 1;) {
      std::vector<TermPtr> rest;
      for (size_t j = 0; j < kept.size(); ++j)
        if (j != i) rest.push_back(kept[j]);
      if (session_.check_implies(kept[i], tm::disj(rest), game_.env) ==
          Tri::True)
        kept = std::move(rest);
      else
        ++i;
    }
  }
  return normalize(tm::disj(std::move(kept)));
}

namespace {

// Binds every primed state reference of `body` as a plain bound variable
// (named with the SMT prime suffix), returning binders and rewritten body.
std::pair<std::vector<std::pair<std::string, Sort>>, TermPtr> close_primed(
    const TermPtr& body, const VarEnv& env) {
  std::vector<std::pair<std::string, Sort>> binders;
  std::map<VarRef, TermPtr> subst;
  for (const auto& fv : free_vars(body)) {
    if (!fv.primed) continue;
    const auto* e = env.lookup(fv.name);
    if (!e) throw UnknownVariable(fv.name);
    std::string bound = smt2_var_name(fv.name, true);
    binders.push_back({bound, e->sort});
    subst[fv] = tm::var(bound);
  }
  return {binders, subst.empty() ? body : substitute(body, subst)};
}

std::vector<std::pair<std::string, Sort>> input_binders(const TermPtr& t,
                                                        const VarEnv& env) {
  std::vector<std::pair<std::string, Sort>> out;
  for (const auto& fv : free_vars(t)) {
    if (fv.primed) continue;
    const auto* e = env.lookup(fv.name);
    if (e && e->kind == VarKind::Input) out.push_back({fv.name, e->sort});
  }
  return out;
}

}  // namespace

// One-step enforceability at `loc` towards per-location payload:
//   System:      forall inputs. OR_t exists primed. guard & domain(to)' & payload(to)'
//   Environment: domain(loc) & exists inputs. AND_t forall primed.
//                  (guard & domain(to)') => payload(to)'
TermPtr GameSolver::enforce_step(PlayerId p, size_t loc,
                                 const Region& payload) {
  const VarEnv& env = game_.env;
  std::vector<TermPtr> parts;
  for (const auto* t : game_.out(loc)) {
    TermPtr next = normalize(tm::conj(
        {domain_of(t->to),
         payload.at(t->to)}));
    TermPtr next_primed = apply_priming(next, PrimeDirection::PrimeAll, env);
    if (p == PlayerId::System) {
      TermPtr body = tm::conj({t->guard, next_primed});
      auto [binders, closed] = close_primed(body, env);
      parts.push_back(tm::exists(binders, closed));
    } else {
      TermPtr body = tm::implies(
          tm::conj({t->guard,
                    apply_priming(domain_of(t->to), PrimeDirection::PrimeAll,
                                  env)}),
          apply_priming(payload.at(t->to), PrimeDirection::PrimeAll, env));
      auto [binders, closed] = close_primed(body, env);
      parts.push_back(tm::forall(binders, closed));
    }
  }
  TermPtr combined = p == PlayerId::System ? tm::disj(std::move(parts))
                                           : tm::conj(std::move(parts));
  TermPtr quantified =
      p == PlayerId::System
          ? tm::forall(input_binders(combined, env), combined)
          : tm::exists(input_binders(combined, env), combined);
  TermPtr elim = prune_disjuncts(normalize(session_.qelim(quantified, env).term));
  if (p == PlayerId::Environment)
    elim = normalize(tm::conj({domain_of(loc), elim}));
  return elim;
}

Region GameSolver::cpre(PlayerId p, const Region& r) {
  Region out;
  out.per_loc.reserve(game_.locations.size());
  for (size_t loc = 0; loc < game_.locations.size(); ++loc) {
    if (expired()) throw Bail{"timeout"};
    out.per_loc.push_back(enforce_step(p, loc, r));
  }
  return out;
}

smt::Tri GameSolver::region_includes(const Region& r1, const Region& r2) {
  bool unknown = false;
  for (size_t i = 0; i < r1.size(); ++i) {
    Tri t = session_.check_implies(r2.at(i), r1.at(i), game_.env);
    if (t == Tri::False) return Tri::False;
    if (t == Tri::Unknown) unknown = true;
  }
  return unknown ? Tri::Unknown : Tri::True;
}

smt::Tri GameSolver::region_empty(const Region& r) {
  bool unknown = false;
  for (size_t i = 0; i < r.size(); ++i) {
    TermPtr n = normalize(r.at(i));
    if (n->is_false()) continue;
    auto res = session_.check_sat({n}, game_.env);
    if (res.verdict == smt::SatResult::Verdict::Sat) return Tri::False;
    if (res.verdict == smt::SatResult::Verdict::Unknown) unknown = true;
  }
  return unknown ? Tri::Unknown : Tri::True;
}

Region GameSolver::region_and(const Region& a, const Region& b) {
  Region out;
  for (size_t i = 0; i < a.size(); ++i) {
    TermPtr t = normalize(tm::conj({a.at(i), b.at(i)}));
    if (term_size(t) > 150) t = session_.simplify(t, game_.env);
    out.per_loc.push_back(std::move(t));
  }
  return out;
}

Region GameSolver::region_or(const Region& a, const Region& b) {
  Region out;
  for (size_t i = 0; i < a.size(); ++i)
    out.per_loc.push_back(
        prune_disjuncts(normalize(tm::disj({a.at(i), b.at(i)}))));
  return out;
}

Region GameSolver::region_minus(const Region& a, const Region& b) {
  Region out;
  for (size_t i = 0; i < a.size(); ++i) {
    TermPtr t = normalize(tm::conj({a.at(i), tm::neg(b.at(i))}));
    // complements carry no disjunctive structure to prune; let the backend
    // re-normalize them before they multiply into every later query
    if (term_size(t) > 60)
      t = prune_disjuncts(session_.simplify(t, game_.env));
    out.per_loc.push_back(std::move(t));
  }
  return out;
}

// --- attractor -----------------------------------------------------------------

AttractorResult GameSolver::attractor(
    PlayerId p, const Region& target,
    const std::function<smt::Tri(const Region&)>& stop_when) {
  static const bool debug = getenv("ISSY_DEBUG") != nullptr;
  AttractorResult res;
  Region x = target;
  for (auto& t : x.per_loc) t = normalize(t);
  res.layers.push_back(x);

  for (int iter = 1;; ++iter) {
    if (debug) {
      size_t total = 0, biggest = 0;
      for (const auto& t : x.per_loc) {
        size_t n = term_size(t);
        total += n;
        biggest = std::max(biggest, n);
      }
      std::cerr << "[attr p=" << (p == PlayerId::System ? "sys" : "env")
                << " iter=" << iter << " total=" << total
                << " max=" << biggest << "]\n";
    }
    if (iter > opts_.iteration_budget || expired()) {
      res.region = x;
      res.complete = false;
      return res;
    }
    Region next = region_or(x, cpre(p, x));

    if (opts_.accelerate && iter % opts_.accel_cadence == 0) {
      for (size_t loc = 0; loc < game_.locations.size(); ++loc) {
        auto lemma = accelerate_geometric(p, loc, target, next);
        if (lemma) {
          next.per_loc[loc] =
              normalize(tm::disj({next.at(loc), lemma->conclusion}));
          res.lemmas.push_back(*lemma);
        }
      }
    }

    if (stop_when) {
      Tri s = stop_when(next);
      if (s == Tri::True) {
        res.layers.push_back(next);
        res.region = next;
        res.early_stop = true;
        return res;
      }
    }

    // The iterates only grow, so a certified inclusion next ⊆ x proves the
    // fixpoint regardless of earlier inconclusive rounds.
    Tri conv = region_includes(x, next);
    if (conv == Tri::True) {
      res.region = x;
      res.complete = true;
      return res;
    }
    if (conv == Tri::Unknown) res.saw_unknown = true;  // D18: keep going
    x = next;
    res.layers.push_back(x);
  }
}

// --- geometric acceleration -------------------------------------------------------

namespace {

// Does `guard` syntactically force v' = v on every disjunct?
bool guard_keeps(const TermPtr& guard, const std::string& v) {
  TermPtr g = normalize(guard);
  if (g->is_app(Op::Or)) {
    for (const auto& d : g->args)
      if (!guard_keeps(d, v)) return false;
    return true;
  }
  std::vector<TermPtr> conjuncts;
  if (g->is_app(Op::And))
    conjuncts = g->args;
  else
    conjuncts = {g};
  for (const auto& c : conjuncts) {
    if (!c->is_app(Op::Eq) || c->args.size() != 2) continue;
    const auto& a = c->args[0];
    const auto& b = c->args[1];
    auto is_ref = [&](const TermPtr& t, bool primed) {
      return t->is_var() && t->var == v && t->primed == primed;
    };
    if ((is_ref(a, true) && is_ref(b, false)) ||
        (is_ref(a, false) && is_ref(b, true)))
      return true;
  }
  return false;
}

void collect_comparisons(const TermPtr& t, std::vector<TermPtr>& out) {
  if (t->kind == Term::Kind::App) {
    switch (t->op) {
      case Op::Le:
      case Op::Lt:
      case Op::Ge:
      case Op::Gt:
      case Op::Eq:
        out.push_back(t);
        return;
      default:
        for (const auto& a : t->args) collect_comparisons(a, out);
        return;
    }
  }
}

}  // namespace

std::optional<AccelLemma> GameSolver::accelerate_geometric(
    PlayerId p, size_t loc, const Region& target, const Region& reached) {
  // Self-loops carry the repeated strategy.
  std::vector<const SymbolicGame::Transition*> loops;
  std::vector<size_t> loop_ids;
  for (size_t i = 0; i < game_.transitions.size(); ++i) {
    const auto& t = game_.transitions[i];
    if (t.from == loc && t.to == loc) {
      loops.push_back(&t);
      loop_ids.push_back(i);
    }
  }
  if (loops.empty()) return std::nullopt;

  // SCC of loc in the location graph bounds the relevant variables (D21).
  std::set<size_t> fwd{loc}, bwd{loc};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& t : game_.transitions) {
      if (fwd.count(t.from) && fwd.insert(t.to).second) grew = true;
      if (bwd.count(t.to) && bwd.insert(t.from).second) grew = true;
    }
  }
  std::set<size_t> scc;
  for (size_t s : fwd)
    if (bwd.count(s)) scc.insert(s);
  std::set<std::string> relevant;
  for (const auto& t : game_.transitions) {
    if (!scc.count(t.from) || !scc.count(t.to)) continue;
    for (const auto& fv : free_vars(t.guard)) relevant.insert(fv.name);
  }
  for (size_t s : scc)
    for (const auto& fv : free_vars(game_.locations[s].domain))
      relevant.insert(fv.name);

  // Progress analysis: numeric state variables not frozen by every loop.
  std::vector<VarEnv::Entry> movers;
  for (const auto& e : game_.env.states()) {
    if (e.sort == Sort::Bool) continue;
    if (!relevant.count(e.name)) continue;
    bool frozen = true;
    for (const auto* l : loops)
      if (!guard_keeps(l->guard, e.name)) frozen = false;
    if (!frozen) movers.push_back(e);
  }
  if (movers.empty()) return std::nullopt;

  // Candidate ranks: distance to the target-defining bounds. Variables
  // outside the SCC are projected from the bound source first (D21).
  TermPtr source = normalize(
      tm::disj({target.at(loc), reached.at(loc)}));
  {
    std::vector<std::pair<std::string, Sort>> irrelevant;
    for (const auto& fv : free_vars(source)) {
      if (fv.primed) continue;
      if (relevant.count(fv.name)) continue;
      const auto* e = game_.env.lookup(fv.name);
      if (e) irrelevant.push_back({fv.name, e->sort});
    }
    if (!irrelevant.empty()) {
      std::map<VarRef, TermPtr> subst;
      std::vector<std::pair<std::string, Sort>> binders;
      for (const auto& [n, s] : irrelevant) {
        std::string b = n + "__proj";
        binders.push_back({b, s});
        subst[{n, false}] = tm::var(b);
      }
      source = session_
                   .qelim(tm::exists(binders, substitute(source, subst)),
                          game_.env)
                   .term;
      if (has_quantifier(source)) return std::nullopt;
    }
  }

  std::vector<TermPtr> comparisons;
  collect_comparisons(source, comparisons);

  std::vector<TermPtr> ranks;
  auto add_rank = [&](const TermPtr& r) {
    TermPtr n = normalize(r);
    for (const auto& known : ranks)
      if (structural_equal(known, n)) return;
    if (ranks.size() < 8) ranks.push_back(n);
  };
  for (const auto& cmp : comparisons) {
    if (cmp->args.size() != 2) continue;
    for (int side = 0; side < 2; ++side) {
      const TermPtr& a = cmp->args[side];
      const TermPtr& b = cmp->args[1 - side];
      if (!a->is_var() || a->primed) continue;
      bool is_mover = false;
      for (const auto& m : movers)
        if (m.name == a->var) is_mover = true;
      if (!is_mover) continue;
      if (mentions_primed(b) || mentions_input(b, game_.env)) continue;
      // v <= b: descend from above (rank v-b); v >= b: from below (b-v);
      // equality tries both.
      Op op = cmp->op;
      if (side == 1) {
        op = op == Op::Le   ? Op::Ge
             : op == Op::Lt ? Op::Gt
             : op == Op::Ge ? Op::Le
             : op == Op::Gt ? Op::Lt
                            : Op::Eq;
      }
      TermPtr above = tm::sub(tm::var(a->var), b);
      TermPtr below = tm::sub(b, tm::var(a->var));
      switch (op) {
        case Op::Le:
        case Op::Lt:
          add_rank(above);
          break;
        case Op::Ge:
        case Op::Gt:
          add_rank(below);
          break;
        case Op::Eq:
          add_rank(above);
          add_rank(below);
          break;
        default:
          break;
      }
    }
  }
  if (ranks.empty()) return std::nullopt;

  TermPtr sub_target = normalize(reached.at(loc));
  TermPtr not_reached = normalize(tm::neg(sub_target));
  if (not_reached->is_false()) return std::nullopt;

  for (const auto& rank : ranks) {
    Sort rank_sort;
    try {
      rank_sort = typecheck(rank, game_.env);
    } catch (const std::exception&) {
      continue;
    }
    if (rank_sort == Sort::Bool) continue;
    // Real-valued ranks need a positive step bound (D20); when the
    // configured step is too coarse for the game's constants a finer
    // candidate may still certify descent.
    std::vector<Rational> eps_candidates;
    if (rank_sort == Sort::Int) {
      eps_candidates = {Rational(1)};
    } else {
      eps_candidates = {opts_.epsilon_real};
      if (!(opts_.epsilon_real == Rational(1, 10)))
        eps_candidates.push_back(Rational(1, 10));
    }
    for (const Rational& eps : eps_candidates) {

    // Invariant candidate pool: rank lower bound, the location domain, and
    // the prime-free parts of the loop guards.
    std::vector<TermPtr> pool;
    pool.push_back(tm::ge(rank, tm::constant(int64_t{0})));
    {
      TermPtr dom = domain_of(loc);
      if (!dom->is_true()) pool.push_back(dom);
      for (const auto* l : loops) {
        std::vector<TermPtr> conjuncts;
        TermPtr g = normalize(l->guard);
        if (g->is_app(Op::And))
          conjuncts = g->args;
        else
          conjuncts = {g};
        for (const auto& c : conjuncts)
          if (!mentions_primed(c) && !mentions_input(c, game_.env) &&
              pool.size() < 8)
            pool.push_back(c);
      }
    }

    // Decrease payload: stay in the (primed) invariant with the rank reduced
    // by epsilon, or land in the sub-target.
    auto descent_valid = [&](const std::vector<TermPtr>& inv) -> Tri {
      TermPtr b = tm::conj(inv);
      TermPtr b_primed =
          apply_priming(b, PrimeDirection::PrimeAll, game_.env);
      TermPtr rank_primed =
          apply_priming(rank, PrimeDirection::PrimeAll, game_.env);
      TermPtr decreased =
          tm::le(rank_primed, tm::sub(rank, tm::constant(eps)));
      TermPtr payload = tm::disj(
          {tm::conj({b_primed, decreased}),
           apply_priming(sub_target, PrimeDirection::PrimeAll, game_.env)});
      TermPtr step = enforce_self_loops(p, loc, payload);
      TermPtr requirement =
          tm::conj({tm::ge(rank, tm::constant(int64_t{0})), step});
      return session_.check_implies(
          normalize(tm::conj({b, not_reached})), normalize(requirement),
          game_.env);
    };

    if (descent_valid(pool) != Tri::True) continue;

    // Greedy generalization: drop pool conjuncts while the check passes
    // (D19).
    std::vector<TermPtr> kept = pool;
    for (size_t i = 0; i < kept.size();) {
      std::vector<TermPtr> without = kept;
      without.erase(without.begin() + i);
      if (descent_valid(without) == Tri::True)
        kept = std::move(without);
      else
        ++i;
    }

    AccelLemma lemma;
    lemma.location = loc;
    lemma.base = sub_target;
    lemma.invariant = normalize(tm::conj(kept));
    lemma.rank = rank;
    lemma.epsilon = eps;
    lemma.conclusion = lemma.invariant;
    lemma.transition = loop_ids[0];
    return lemma;
    }
  }
  return std::nullopt;
}

// Enforceability through the self-loops only, with an explicit primed
// payload (used by the descent check, where the payload mixes primed and
// unprimed variables).
TermPtr GameSolver::enforce_self_loops(PlayerId p, size_t loc,
                                       const TermPtr& payload) {
  const VarEnv& env = game_.env;
  std::vector<TermPtr> parts;
  for (const auto& t : game_.transitions) {
    if (t.from != loc || t.to != loc) continue;
    TermPtr dom_primed =
        apply_priming(domain_of(loc), PrimeDirection::PrimeAll, env);
    if (p == PlayerId::System) {
      TermPtr body = tm::conj({t.guard, dom_primed, payload});
      auto [binders, closed] = close_primed(body, env);
      parts.push_back(tm::exists(binders, closed));
    } else {
      TermPtr body =
          tm::implies(tm::conj({t.guard, dom_primed}), payload);
      auto [binders, closed] = close_primed(body, env);
      parts.push_back(tm::forall(binders, closed));
    }
  }
  TermPtr combined = p == PlayerId::System ? tm::disj(std::move(parts))
                                           : tm::conj(std::move(parts));
  TermPtr quantified =
      p == PlayerId::System
          ? tm::forall(input_binders(combined, env), combined)
          : tm::exists(input_binders(combined, env), combined);
  return normalize(session_.qelim(quantified, env).term);
}

// --- solve dispatch -----------------------------------------------------------------

Region GameSolver::safe_region() const {
  Region r;
  for (const auto& l : game_.locations)
    r.per_loc.push_back(l.color > 0 ? l.domain : tm::falsity());
  return r;
}

Region GameSolver::target_region() const { return safe_region(); }

SolveOutcome GameSolver::solve() {
  try {
    switch (game_.objective) {
      case WinCond::Safety:
        return solve_safety();
      case WinCond::Reachability:
        return solve_reachability();
      case WinCond::Buechi: {
        std::vector<uint64_t> colors;
        for (const auto& l : game_.locations)
          colors.push_back(l.color > 0 ? 1 : 0);
        return solve_parity(colors);
      }
      case WinCond::CoBuechi: {
        std::vector<uint64_t> colors;
        for (const auto& l : game_.locations)
          colors.push_back(l.color > 0 ? 1 : 2);
        return solve_parity(colors);
      }
      case WinCond::ParityMaxOdd: {
        std::vector<uint64_t> colors;
        for (const auto& l : game_.locations) colors.push_back(l.color);
        return solve_parity(colors);
      }
    }
  } catch (const Bail& b) {
    SolveOutcome out;
    out.verdict = SolveOutcome::Verdict::Unknown;
    out.unknown_reason = b.reason;
    out.system_region = Region::bottom(game_.locations.size());
    return out;
  } catch (const smt::BackendError&) {
    SolveOutcome out;
    out.verdict = SolveOutcome::Verdict::Unknown;
    out.unknown_reason = "backend";
    out.system_region = Region::bottom(game_.locations.size());
    return out;
  }
  SolveOutcome out;
  out.unknown_reason = "backend";
  return out;
}

SolveOutcome GameSolver::solve_safety() {
  SolveOutcome out;
  TermPtr init_domain = game_.locations[game_.initial].domain;
  Region x = safe_region();

  for (int iter = 0; iter <= opts_.iteration_budget; ++iter) {
    if (expired()) {
      out.verdict = SolveOutcome::Verdict::Unknown;
      out.unknown_reason = "timeout";
      out.system_region = x;
      return out;
    }
    // The iterates over-approximate the winning region: an excluded initial
    // valuation refutes realizability immediately.
    auto covered = session_.check_implies(init_domain, x.at(game_.initial),
                                          game_.env);
    if (covered == Tri::False) {
      out.verdict = SolveOutcome::Verdict::Unrealizable;
      out.system_region = x;
      return out;
    }

    Region next = region_and(safe_region(), cpre(PlayerId::System, x));
    Tri conv = region_includes(next, x);  // x ⊆ next certifies the fixpoint
    if (conv == Tri::True) {
      out.system_region = next;
      Tri ok = session_.check_implies(init_domain, next.at(game_.initial),
                                      game_.env);
      if (ok == Tri::True)
        out.verdict = SolveOutcome::Verdict::Realizable;
      else if (ok == Tri::False)
        out.verdict = SolveOutcome::Verdict::Unrealizable;
      else {
        out.verdict = SolveOutcome::Verdict::Unknown;
        out.unknown_reason = "backend";
      }
      return out;
    }
    x = next;
  }
  out.verdict = SolveOutcome::Verdict::Unknown;
  out.unknown_reason = "budget";
  out.system_region = x;
  return out;
}

SolveOutcome GameSolver::solve_reachability() {
  SolveOutcome out;
  TermPtr init_domain = game_.locations[game_.initial].domain;
  auto covered = [&](const Region& r) {
    return session_.check_implies(init_domain, r.at(game_.initial),
                                  game_.env);
  };
  AttractorResult att =
      attractor(PlayerId::System, target_region(), covered);
  out.layers = att.layers;
  out.lemmas = att.lemmas;
  out.system_region = att.region;

  if (att.early_stop) {
    out.verdict = SolveOutcome::Verdict::Realizable;
    return out;
  }
  if (!att.complete) {
    out.verdict = SolveOutcome::Verdict::Unknown;
    out.unknown_reason = att.saw_unknown ? "backend" : "budget";
    return out;
  }
  Tri ok = covered(att.region);
  if (ok == Tri::True) {
    out.verdict = SolveOutcome::Verdict::Realizable;
  } else if (ok == Tri::False) {
    out.verdict = SolveOutcome::Verdict::Unrealizable;
  } else {
    out.verdict = SolveOutcome::Verdict::Unknown;
    out.unknown_reason = "backend";
  }
  return out;
}

// --- Zielonka -----------------------------------------------------------------------

SolveOutcome GameSolver::solve_parity(const std::vector<uint64_t>& colors) {
  SolveOutcome out;
  Region all;
  for (size_t i = 0; i < game_.locations.size(); ++i)
    all.per_loc.push_back(game_.locations[i].domain);
  Partition part = zielonka(all, colors, 0);
  out.system_region = part.sys;

  TermPtr init_domain = game_.locations[game_.initial].domain;
  Tri ok = session_.check_implies(init_domain, part.sys.at(game_.initial),
                                  game_.env);
  if (ok == Tri::True) {
    out.verdict = SolveOutcome::Verdict::Realizable;
    return out;
  }
  // Exactness: a refuting initial valuation must lie in the environment
  // region, which the recursion computed constructively.
  auto refute = session_.check_sat(
      {normalize(tm::conj({init_domain, part.env.at(game_.initial)}))},
      game_.env);
  if (refute.verdict == smt::SatResult::Verdict::Sat) {
    out.verdict = SolveOutcome::Verdict::Unrealizable;
    return out;
  }
  out.verdict = SolveOutcome::Verdict::Unknown;
  out.unknown_reason = "backend";
  return out;
}

GameSolver::Partition GameSolver::zielonka(
    const Region& remaining, const std::vector<uint64_t>& colors, int depth) {
  static const bool debug = getenv("ISSY_DEBUG") != nullptr;
  charge();
  size_t n = game_.locations.size();
  if (debug) {
    size_t total = 0;
    for (const auto& t : remaining.per_loc) total += term_size(t);
    std::cerr << "[zielonka depth=" << depth << " remaining_size=" << total
              << "]\n";
  }

  Tri empty = region_empty(remaining);
  if (empty == Tri::Unknown) throw Bail{"backend"};
  if (empty == Tri::True)
    return {Region::bottom(n), Region::bottom(n)};

  // Maximum color among locations that still hold states.
  uint64_t c = 0;
  for (size_t i = 0; i < n; ++i) {
    if (normalize(remaining.at(i))->is_false()) continue;
    c = std::max(c, colors[i]);
  }
  PlayerId p = (c % 2 == 1) ? PlayerId::System : PlayerId::Environment;
  PlayerId q = (p == PlayerId::System) ? PlayerId::Environment
                                       : PlayerId::System;

  // Sub-game view: restrict domains to the remaining region (localization).
  std::vector<TermPtr> saved = restriction_;
  for (size_t i = 0; i < n; ++i)
    restriction_[i] = normalize(tm::conj({saved[i], remaining.at(i)}));

  Region target = Region::bottom(n);
  for (size_t i = 0; i < n; ++i)
    if (colors[i] == c) target.per_loc[i] = restriction_[i];

  AttractorResult att_a = attractor(p, target);
  if (!att_a.complete) {
    restriction_ = saved;
    throw Bail{att_a.saw_unknown ? "backend" : "budget"};
  }
  Region rest = region_minus(remaining, att_a.region);
  restriction_ = saved;

  Partition sub = zielonka(rest, colors, depth + 1);
  Region& opp_sub = q == PlayerId::System ? sub.sys : sub.env;

  Tri opp_empty = region_empty(opp_sub);
  if (opp_empty == Tri::Unknown) throw Bail{"backend"};
  if (opp_empty == Tri::True) {
    Partition out{Region::bottom(n), Region::bottom(n)};
    (p == PlayerId::System ? out.sys : out.env) = remaining;
    return out;
  }

  for (size_t i = 0; i < n; ++i)
    restriction_[i] = normalize(tm::conj({saved[i], remaining.at(i)}));
  AttractorResult att_b = attractor(q, opp_sub);
  restriction_ = saved;
  if (!att_b.complete)
    throw Bail{att_b.saw_unknown ? "backend" : "budget"};

  // Attractor results are only meaningful inside the sub-game.
  Region b_in = region_and(att_b.region, remaining);
  Region rest2 = region_minus(remaining, b_in);
  Partition out = zielonka(rest2, colors, depth + 1);
  Region& opp_final = q == PlayerId::System ? out.sys : out.env;
  opp_final = region_or(opp_final, b_in);
  return out;
}

// --- wrappers -------------------------------------------------------------------------

Region cpre(const SymbolicGame& g, PlayerId p, const Region& r,
            smt::SmtSession& session, const SolveOptions& opts) {
  GameSolver solver(g, session, opts);
  return solver.cpre(p, r);
}

SolveOutcome solve(const SymbolicGame& g, smt::SmtSession& session,
                   const SolveOptions& opts) {
  GameSolver solver(g, session, opts);
  return solver.solve();
}

}  // namespace issy::solver
