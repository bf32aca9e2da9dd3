#pragma once

#include <optional>
#include <string>
#include <vector>

#include "issy/solver.hpp"

namespace issy::extract {

struct NotRealizable : std::runtime_error {
  NotRealizable() : std::runtime_error("strategy extraction needs a realizable outcome") {}
};

// A transition whose primed constraints are not a plain assignment tuple
// was needed; producing code for it would require Skolem synthesis.
struct ExtractUnsupported : std::runtime_error {
  ExtractUnsupported(const std::string& loc, const std::string& what)
      : std::runtime_error("cannot extract at location '" + loc +
                           "': " + what),
        location(loc) {}
  std::string location;
};

struct Assign {
  std::string var;  // state variable
  TermPtr expr;     // prime-free, over states and inputs
};

// One guarded alternative of the reactive loop. Ranked branches repeat the
// assignment (consuming one input round per repetition) until exit_cond
// holds; the rank certificate bounds the repetition count.
struct Branch {
  TermPtr cond;  // prime-free, over states and inputs
  std::vector<Assign> assigns;
  size_t next_loc = 0;
  bool ranked_loop = false;
  TermPtr exit_cond;  // over states; set iff ranked_loop
  TermPtr rank;       // informational, for the harness
  Rational epsilon;
};

struct AbstractProgram {
  VarEnv env;
  std::vector<std::string> loc_names;
  std::vector<uint64_t> loc_colors;
  size_t initial = 0;
  std::vector<std::vector<Branch>> branches;  // per location, in firing order
};

// Turns solver artifacts for a realizable Safety/Reachability game into a
// deterministic reactive program; throws ExtractUnsupported/NotRealizable.
AbstractProgram extract_strategy(const SymbolicGame& g,
                                 const solver::SolveOutcome& outcome,
                                 smt::SmtSession& session);

// Self-contained C11, warning-free under -Wall. Protocol: first stdin line
// carries initial state values (declared state order); each following line
// carries one step's inputs (declared input order); after every consumed
// line the program prints "loc v1 v2 ..." for the state it moved to. EOF
// exits 0; malformed input exits 4.
std::string emit_c(const AbstractProgram& p);

}  // namespace issy::extract
