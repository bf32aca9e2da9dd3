#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "issy/game.hpp"
#include "issy/smt.hpp"

namespace issy::solver {

// Symbolic state set: one term over (unprimed) state variables per location.
struct Region {
  std::vector<TermPtr> per_loc;

  static Region bottom(size_t n);
  static Region top(size_t n);
  const TermPtr& at(size_t loc) const { return per_loc[loc]; }
  size_t size() const { return per_loc.size(); }
};

enum class PlayerId { System, Environment };

// Ranking argument justifying that unbounded repetition of a strategy
// through `location` forces the play from `conclusion` into `base`.
struct AccelLemma {
  size_t location = 0;
  TermPtr base;        // sub-target already known winning
  TermPtr invariant;
  TermPtr rank;        // numeric term over state variables
  Rational epsilon;
  TermPtr conclusion;  // implied by invariant; joined into the attractor
  size_t transition = 0;  // self-loop witnessing the descent
};

struct SolveOptions {
  int iteration_budget = 100;
  int accel_cadence = 3;  // attempt acceleration every k-th iteration (D22)
  bool accelerate = true;
  Rational epsilon_real = Rational(1, 2);  // D20; Int ranks use 1
  std::chrono::steady_clock::time_point deadline =
      std::chrono::steady_clock::time_point::max();
};

struct SolveOutcome {
  enum class Verdict { Realizable, Unrealizable, Unknown };
  Verdict verdict = Verdict::Unknown;
  std::string unknown_reason;  // budget | timeout | backend
  Region system_region;
  std::vector<Region> layers;      // attractor layers (reachability)
  std::vector<AccelLemma> lemmas;  // accepted lemmas, for extraction
};

struct AttractorResult {
  Region region;
  std::vector<Region> layers;
  std::vector<AccelLemma> lemmas;
  bool complete = false;       // fixpoint certified
  bool early_stop = false;     // stop_when fired before convergence
  bool saw_unknown = false;    // some convergence check was inconclusive
};

class GameSolver {
 public:
  GameSolver(const SymbolicGame& game, smt::SmtSession& session,
             SolveOptions opts = {});

  // Enforceable predecessor. System: the environment moves first, then the
  // system picks a transition and primed values; a stuck system loses (D16).
  Region cpre(PlayerId p, const Region& r);

  // Least fixpoint of X -> target v cpre(X) with the acceleration hook.
  AttractorResult attractor(PlayerId p, const Region& target,
                            const std::function<smt::Tri(const Region&)>&
                                stop_when = nullptr);

  // Geometric acceleration at one location: progress analysis, distance
  // ranks from the target bounds, SMT-checked descent with greedy
  // generalization (D19-D21).
  std::optional<AccelLemma> accelerate_geometric(PlayerId p, size_t loc,
                                                 const Region& target,
                                                 const Region& reached);

  SolveOutcome solve();

  // True iff r2(l) implies r1(l) for every location.
  smt::Tri region_includes(const Region& r1, const Region& r2);

  const SymbolicGame& game() const { return game_; }

 private:
  const SymbolicGame& game_;
  smt::SmtSession& session_;
  SolveOptions opts_;
  // Zielonka recursion restricts domains to a remaining region.
  std::vector<TermPtr> restriction_;
  int steps_used_ = 0;

  struct Bail {
    std::string reason;
  };

  void charge(int n = 1);
  bool expired() const;
  TermPtr domain_of(size_t loc) const;       // domain ∧ restriction
  TermPtr prune_disjuncts(TermPtr t);        // drop semantically redundant
  TermPtr enforce_step(PlayerId p, size_t loc, const Region& payload);
  TermPtr enforce_self_loops(PlayerId p, size_t loc, const TermPtr& payload);
  Region safe_region() const;    // color>0 ? domain : false
  Region target_region() const;  // same shape for reachability

  SolveOutcome solve_safety();
  SolveOutcome solve_reachability();
  SolveOutcome solve_parity(const std::vector<uint64_t>& colors);

  struct Partition {
    Region sys;
    Region env;
  };
  Partition zielonka(const Region& remaining,
                     const std::vector<uint64_t>& colors, int depth);

  smt::Tri region_empty(const Region& r);
  Region region_and(const Region& a, const Region& b);
  Region region_or(const Region& a, const Region& b);
  Region region_minus(const Region& a, const Region& b);
  friend class StrategyExtractor;
};

// Spec-shaped convenience wrappers.
Region cpre(const SymbolicGame& g, PlayerId p, const Region& r,
            smt::SmtSession& session, const SolveOptions& opts = {});
SolveOutcome solve(const SymbolicGame& g, smt::SmtSession& session,
                   const SolveOptions& opts = {});

}  // namespace issy::solver
