#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "issy/diagnostics.hpp"
#include "issy/spec.hpp"

namespace issy {
namespace smt {
class SmtSession;
}

// Symbolic two-player game: locations carry colors and state-domain
// invariants; transitions carry guards over inputs, states, and primed
// states. A move: the environment picks inputs, then the system picks a
// transition and primed-state values satisfying guard and the target domain;
// a stuck system loses immediately (D16).
struct SymbolicGame {
  struct Location {
    std::string name;
    uint64_t color = 1;
    TermPtr domain;  // prime-free, input-free
  };
  struct Transition {
    size_t from;
    size_t to;
    TermPtr guard;
  };

  VarEnv env;
  std::vector<Location> locations;
  std::vector<Transition> transitions;
  WinCond objective = WinCond::Safety;
  size_t initial = 0;

  std::optional<size_t> find_location(const std::string& name) const;
  std::vector<const Transition*> out(size_t loc) const;
};

struct EnvMismatch : std::runtime_error {
  EnvMismatch() : std::runtime_error("games declare different variables") {}
};
struct MultipleNonSafety : std::runtime_error {
  MultipleNonSafety()
      : std::runtime_error("at most one component may be non-safety") {}
};

// A game block of an elaborated Spec as a SymbolicGame.
SymbolicGame from_game_block(const VarEnv& env, const GameBlock& block);

// Trivially realizable single-location safety game over env.
SymbolicGame trivial_game(const VarEnv& env);

// Conjunctive product: reachable location pairs, conjoined domains and
// guards. Entering a color-0 location of a safety component redirects to an
// absorbing sink colored losing for the system under the product objective
// (D17).
SymbolicGame product(const SymbolicGame& g1, const SymbolicGame& g2);

// Structural warnings: dead ends, unreachable locations, and (when a session
// is supplied) unsatisfiable guards.
std::vector<Diagnostic> validate(const SymbolicGame& g,
                                 smt::SmtSession* session = nullptr);

// Drops transitions whose guard can never fire (guard ∧ source domain ∧
// primed target domain unsatisfiable) and locations that become unreachable.
// Product arenas of automaton-derived and hand-written games are full of
// such contradictions, and every dead transition widens every cpre formula.
SymbolicGame prune_unsat_transitions(const SymbolicGame& g,
                                     smt::SmtSession& session);

}  // namespace issy
