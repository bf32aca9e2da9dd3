#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "issy/terms.hpp"

namespace issy {
class Subprocess;
}

namespace issy::smt {

// Process failure or malformed response; timeouts and solver "unknown" are
// reported as Unknown verdicts, never thrown (D5).
struct BackendError : std::runtime_error {
  explicit BackendError(const std::string& m)
      : std::runtime_error("smt backend: " + m) {}
};

enum class Tri { True, False, Unknown };

struct SatResult {
  enum class Verdict { Sat, Unsat, Unknown };
  Verdict verdict = Verdict::Unknown;
  std::optional<Valuation> model;  // present iff Sat
  std::string reason;              // for Unknown
};

struct SolverConfig {
  std::string command;  // empty: ISSY_SMT_CMD, else z3, else bundled issy-smt
  int query_timeout_ms = 10'000;
  std::chrono::steady_clock::time_point global_deadline =
      std::chrono::steady_clock::time_point::max();
};

// Resolved argv for the backend; exposed for --version reporting.
std::vector<std::string> resolve_smt_command(const std::string& override_cmd);

struct QelimResult {
  TermPtr term;
  bool eliminated = false;  // false: input returned unchanged (D4)
};

// One solver subprocess with per-query push/pop. Single-owner, stateful;
// concurrent use requires distinct sessions.
class SmtSession {
 public:
  explicit SmtSession(SolverConfig cfg = {});
  ~SmtSession();

  SatResult check_sat(const std::vector<TermPtr>& assertions,
                      const VarEnv& env);
  Tri check_implies(const TermPtr& a, const TermPtr& b, const VarEnv& env);
  // Equivalent quantifier-free term, or the input unchanged.
  QelimResult qelim(const TermPtr& t, const VarEnv& env);
  // Equivalent term through the backend's simplifier (the qe tactic also
  // normalizes quantifier-free input); returns the input on failure.
  TermPtr simplify(const TermPtr& t, const VarEnv& env);

  // Validity of a possibly-quantified closed-over-env formula.
  Tri check_valid(const TermPtr& t, const VarEnv& env);

  std::string backend_description() const;
  size_t num_queries() const { return queries_; }

 private:
  QelimResult qelim_inner(const TermPtr& input, const VarEnv& env);

  struct Impl;
  std::unique_ptr<Impl> impl_;
  size_t queries_ = 0;

  friend struct Impl;
};

// Version line of the resolved backend (spawned with --version).
std::string backend_version_line(const std::vector<std::string>& argv);

}  // namespace issy::smt
