#pragma once

#include <optional>
#include <string>
#include <vector>

#include "issy/game.hpp"
#include "issy/hoa.hpp"
#include "issy/rpltl.hpp"

namespace issy::logic {

// Ordered table of normalized distinct atoms; the index is the proposition
// id used in the abstracted LTL formula.
struct AtomTable {
  std::vector<TermPtr> atoms;

  std::optional<size_t> find(const TermPtr& normalized_atom) const;
  size_t intern(const TermPtr& atom);  // normalizes, dedupes
};

struct MissingAtom : std::runtime_error {
  explicit MissingAtom(const std::string& m)
      : std::runtime_error("atom not in table: " + m) {}
};

AtomTable collect_atoms(const RpltlPtr& f);

// Propositional LTL in the translator's syntax, atoms replaced by p<i>.
std::string abstract_to_ltl(const RpltlPtr& f, const AtomTable& t);

// True iff the negation normal form uses only atoms, && || X G W R.
bool is_syntactic_safety(const RpltlPtr& f);

struct TranslatorError : std::runtime_error {
  TranslatorError(int code, const std::string& stderr_text)
      : std::runtime_error("ltl translator failed (exit " +
                           std::to_string(code) + "): " + stderr_text),
        exit_code(code),
        stderr_text(stderr_text) {}
  int exit_code;
  std::string stderr_text;
};

struct LtlTranslatorConfig {
  std::string command;  // empty: ISSY_LTL_CMD, else ltl2tgba, else bundled
  int timeout_ms = 120'000;
};

std::vector<std::string> resolve_ltl_command(const std::string& override_cmd);
bool translator_available(const LtlTranslatorConfig& cfg = {});

// Runs the external translator on a propositional LTL formula; returns HOA.
std::string translate_ltl(const std::string& ltl,
                          const LtlTranslatorConfig& cfg = {});

// Concretizes a deterministic complete automaton into a symbolic game:
// locations are reachable (state, entry-color) pairs, guards substitute each
// p<i> by its atom term, objective ParityMaxOdd (Buchi stays Buchi).
SymbolicGame automaton_to_game(const hoa::Automaton& a, const AtomTable& t,
                               const VarEnv& env);

// Full pipeline for one formula block: implication, abstraction, external
// translation, import, concretization.
SymbolicGame formula_block_to_game(const std::vector<RpltlPtr>& assumes,
                                   const std::vector<RpltlPtr>& asserts,
                                   const VarEnv& env,
                                   const LtlTranslatorConfig& cfg = {});

// Product of all components of a spec (formula blocks first, then game
// blocks, declaration order). Empty spec: trivial safety game.
SymbolicGame build_arena(const Spec& spec, const LtlTranslatorConfig& cfg = {});

}  // namespace issy::logic
