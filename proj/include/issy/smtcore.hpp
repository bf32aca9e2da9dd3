#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "issy/terms.hpp"

// Decision engine for boolean combinations of linear int/real constraints,
// including quantifiers: Cooper's algorithm over Int, Ferrante-Rackoff over
// Real, Shannon expansion over Bool. Backs the bundled `issy-smt` tool; the
// rest of the toolchain only ever talks to an SMT backend over the wire.
namespace issy::smtcore {

// Plain symbol table: smtcore has no priming concept, names arrive
// pre-suffixed.
using SymTab = std::map<std::string, Sort>;

struct Budget {
  std::chrono::steady_clock::time_point deadline =
      std::chrono::steady_clock::time_point::max();
  size_t max_literals = 2'000'000;

  bool expired() const {
    return std::chrono::steady_clock::now() >= deadline;
  }
};

struct QeResult {
  TermPtr term;       // quantifier-free on success; input otherwise
  bool complete = false;
  std::string reason;  // why elimination failed, when it did
};

// Eliminates every quantifier in t. Free variables keep their meaning.
QeResult eliminate_quantifiers(const TermPtr& t, const SymTab& syms,
                               const Budget& budget);

enum class Verdict { Sat, Unsat, Unknown };

struct CheckResult {
  Verdict verdict = Verdict::Unknown;
  std::map<std::string, Value> model;  // populated on Sat
  std::string reason;                  // populated on Unknown
};

// Decides the conjunction of assertions over the declared symbols and
// produces a full model on sat.
CheckResult check_sat(const std::vector<TermPtr>& assertions,
                      const SymTab& syms, const Budget& budget);

}  // namespace issy::smtcore
