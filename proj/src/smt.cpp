#include "issy/smt.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "issy/sexpr.hpp"
#include "issy/smtlib.hpp"
#include "issy/subprocess.hpp"

namespace issy::smt {

namespace {

bool on_path(const std::string& prog) {
  const char* path = getenv("PATH");
  if (!path) return false;
  std::string p(path);
  size_t start = 0;
  while (start <= p.size()) {
    size_t colon = p.find(':', start);
    std::string dir =
        p.substr(start, colon == std::string::npos ? colon : colon - start);
    if (!dir.empty() && access((dir + "/" + prog).c_str(), X_OK) == 0)
      return true;
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  return false;
}

}  // namespace

std::vector<std::string> resolve_smt_command(const std::string& override_cmd) {
  if (const char* env = getenv("ISSY_SMT_CMD"); env && *env)
    return split_command(env);
  if (!override_cmd.empty()) return split_command(override_cmd);
  if (on_path("z3")) return {"z3", "-in"};
  std::string dir = self_exe_dir();
  if (!dir.empty() && access((dir + "/issy-smt").c_str(), X_OK) == 0)
    return {dir + "/issy-smt"};
  // Last resort: hope it is on PATH after all.
  return {"z3", "-in"};
}

std::string backend_version_line(const std::vector<std::string>& argv) {
  if (argv.empty()) return "unavailable";
  try {
    Subprocess p({argv[0], "--version"});
    p.close_stdin();
    std::string out;
    for (int i = 0; i < 50; ++i) {
      size_t before = out.size();
      if (!p.read_some(&out, 100)) break;
      if (out.find('\n') != std::string::npos) break;
      if (out.size() == before && i > 3) break;
    }
    p.wait(200);
    auto nl = out.find('\n');
    if (nl != std::string::npos) out = out.substr(0, nl);
    return out.empty() ? "unavailable" : out;
  } catch (...) {
    return "unavailable";
  }
}

struct SmtSession::Impl {
  SolverConfig cfg;
  std::vector<std::string> argv;
  std::unique_ptr<Subprocess> proc;
  std::string rx;    // unparsed response bytes
  size_t rx_pos = 0;
  std::map<std::string, Tri> implies_cache;
  std::map<std::string, std::pair<bool, TermPtr>> qe_cache;

  explicit Impl(SolverConfig c) : cfg(std::move(c)) {
    argv = resolve_smt_command(cfg.command);
  }

  int remaining_ms() const {
    if (cfg.global_deadline == std::chrono::steady_clock::time_point::max())
      return cfg.query_timeout_ms;
    auto now = std::chrono::steady_clock::now();
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                    cfg.global_deadline - now)
                    .count();
    if (left <= 0) return 0;
    return static_cast<int>(
        std::min<long long>(left, cfg.query_timeout_ms));
  }

  void ensure_alive() {
    if (proc && proc->alive()) return;
    rx.clear();
    rx_pos = 0;
    proc = std::make_unique<Subprocess>(argv);
    std::ostringstream pre;
    pre << "(set-logic ALL)\n";
    pre << "(set-option :timeout " << cfg.query_timeout_ms << ")\n";
    if (!proc->write_all(pre.str())) throw BackendError("failed to start");
  }

  void restart() {
    if (proc) proc->kill_now();
    proc.reset();
  }

  // Reads one complete s-expression from the solver (deadline per call).
  std::optional<SExpr> read_expr(int deadline_ms) {
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::milliseconds(deadline_ms);
    for (;;) {
      std::string err;
      size_t save = rx_pos;
      auto e = parse_one_sexpr(rx, &rx_pos, &err);
      if (e) {
        if (rx_pos > 1 << 20) {
          rx.erase(0, rx_pos);
          rx_pos = 0;
        }
        return e;
      }
      rx_pos = save;
      auto now = std::chrono::steady_clock::now();
      if (now >= deadline) return std::nullopt;
      int left = static_cast<int>(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline -
                                                                 now)
              .count());
      if (!proc->read_some(&rx, std::min(left, 200))) {
        if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
      }
      // A dead child yields no growth; the deadline bounds that case.
    }
  }
};

SmtSession::SmtSession(SolverConfig cfg)
    : impl_(std::make_unique<Impl>(std::move(cfg))) {}

SmtSession::~SmtSession() = default;

namespace {

// Declarations for every free variable of the query terms.
std::string declarations(const std::vector<TermPtr>& terms, const VarEnv& env,
                         std::map<std::string, std::pair<VarRef, Sort>>* names) {
  std::ostringstream os;
  std::map<VarRef, Sort> seen;
  for (const auto& t : terms) {
    for (const auto& fv : free_vars(t)) {
      if (seen.count(fv)) continue;
      const auto* e = env.lookup(fv.name);
      if (!e) throw UnknownVariable(fv.name);
      if (fv.primed && e->kind == VarKind::Input) throw PrimedInput(fv.name);
      seen[fv] = e->sort;
      std::string n = smt2_var_name(fv.name, fv.primed);
      os << "(declare-const " << n << " " << to_string(e->sort) << ")\n";
      if (names) (*names)[n] = {fv, e->sort};
    }
  }
  return os.str();
}

}  // namespace

SatResult SmtSession::check_sat(const std::vector<TermPtr>& assertions,
                                const VarEnv& env) {
  ++queries_;
  auto& im = *impl_;
  SatResult res;
  int deadline = im.remaining_ms();
  if (deadline <= 0) {
    res.reason = "timeout";
    return res;
  }

  std::map<std::string, std::pair<VarRef, Sort>> names;
  std::ostringstream q;
  q << "(push 1)\n";
  q << declarations(assertions, env, &names);
  for (const auto& a : assertions)
    q << "(assert " << serialize_smt2(a) << ")\n";
  q << "(check-sat)\n";

  im.ensure_alive();
  if (!im.proc->write_all(q.str())) {
    im.restart();
    throw BackendError("write failed");
  }
  auto verdict = im.read_expr(deadline + 2000);
  if (!verdict) {
    im.restart();
    res.reason = "timeout";
    return res;
  }
  if (!verdict->is_atom) {
    im.restart();
    throw BackendError("unexpected check-sat response " +
                       verdict->to_string());
  }
  const std::string& v = verdict->atom;
  if (v == "unsat") {
    res.verdict = SatResult::Verdict::Unsat;
  } else if (v == "unknown" || v == "timeout") {
    res.verdict = SatResult::Verdict::Unknown;
    res.reason = "solver reported unknown";
  } else if (v == "sat") {
    res.verdict = SatResult::Verdict::Sat;
    if (!im.proc->write_all("(get-model)\n")) {
      im.restart();
      throw BackendError("write failed");
    }
    auto model = im.read_expr(deadline + 2000);
    if (!model || !model->is_list()) {
      im.restart();
      throw BackendError("missing model");
    }
    Valuation val;
    size_t start = model->head_is("model") ? 1 : 0;
    for (size_t i = start; i < model->size(); ++i) {
      const SExpr& df = (*model)[i];
      if (!df.head_is("define-fun") || df.size() < 5) continue;
      std::string n = df[1].atom;
      auto sort = smtlib::parse_sort(df[3]);
      if (!sort) continue;
      auto it = names.find(n);
      if (it == names.end()) continue;  // solver-internal symbol
      TermPtr vt = smtlib::parse_term(
          df[4], [&](const std::string&) -> std::optional<Sort> {
            return std::nullopt;
          });
      if (!vt->is_const() && vt->kind != Term::Kind::BoolConst) {
        im.restart();
        throw BackendError("non-constant model value for " + n);
      }
      Value value = vt->kind == Term::Kind::BoolConst
                        ? Value::of_bool(vt->bval)
                        : (*sort == Sort::Int ? Value::of_int(vt->value)
                                              : Value::of_real(vt->value));
      value.sort = *sort;
      val[it->second.first] = value;
    }
    // The SatResult invariant: every free variable of the query is assigned.
    for (const auto& [n, info] : names) {
      if (val.count(info.first)) continue;
      Value dflt = info.second == Sort::Bool
                       ? Value::of_bool(false)
                       : (info.second == Sort::Int
                              ? Value::of_int(Rational(0))
                              : Value::of_real(Rational(0)));
      dflt.sort = info.second;
      val[info.first] = dflt;
    }
    res.model = std::move(val);
  } else {
    im.restart();
    throw BackendError("unexpected verdict " + v);
  }
  if (!im.proc->write_all("(pop 1)\n")) im.restart();
  return res;
}

Tri SmtSession::check_implies(const TermPtr& a, const TermPtr& b,
                              const VarEnv& env) {
  TermPtr query = normalize(tm::conj({a, tm::neg(b)}));
  if (query->is_false()) return Tri::True;
  if (structural_equal(a, b)) return Tri::True;
  std::string key = serialize_smt2(query);
  auto& cache = impl_->implies_cache;
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto r = check_sat({query}, env);
  Tri out = Tri::Unknown;
  switch (r.verdict) {
    case SatResult::Verdict::Unsat: out = Tri::True; break;
    case SatResult::Verdict::Sat: out = Tri::False; break;
    default: out = Tri::Unknown; break;
  }
  if (out != Tri::Unknown) cache[key] = out;
  return out;
}

Tri SmtSession::check_valid(const TermPtr& t, const VarEnv& env) {
  return check_implies(tm::truth(), t, env);
}

TermPtr SmtSession::simplify(const TermPtr& t, const VarEnv& env) {
  TermPtr input = normalize(t);
  if (input->kind != Term::Kind::App) return input;
  auto r = qelim_inner(input, env);
  return r.eliminated ? r.term : input;
}

QelimResult SmtSession::qelim(const TermPtr& t, const VarEnv& env) {
  TermPtr input = normalize(t);
  if (!has_quantifier(input)) return {input, true};
  return qelim_inner(input, env);
}

QelimResult SmtSession::qelim_inner(const TermPtr& input, const VarEnv& env) {
  ++queries_;
  auto& im = *impl_;

  std::string key = serialize_smt2(input);
  if (auto it = im.qe_cache.find(key); it != im.qe_cache.end())
    return {it->second.second, it->second.first};

  int deadline = im.remaining_ms();
  if (deadline <= 0) return {input, false};

  std::map<std::string, std::pair<VarRef, Sort>> names;
  std::ostringstream q;
  q << "(push 1)\n";
  q << declarations({input}, env, &names);
  q << "(assert " << key << ")\n";
  q << "(apply qe)\n";

  im.ensure_alive();
  if (!im.proc->write_all(q.str())) {
    im.restart();
    throw BackendError("write failed");
  }
  static const bool debug = getenv("ISSY_DEBUG") != nullptr;
  auto goals = im.read_expr(deadline + 2000);
  if (!goals) {
    im.restart();
    if (debug)
      std::cerr << "[qelim timeout after " << deadline << "ms] size "
                << key.size() << "\n";
    im.qe_cache[key] = {false, input};  // don't stall on it again
    return {input, false};
  }
  if (!im.proc->write_all("(pop 1)\n")) im.restart();

  if (!goals->head_is("goals") || goals->size() < 2 ||
      !(*goals)[1].head_is("goal")) {
    // error response or unexpected shape: treat as not eliminated
    if (debug)
      std::cerr << "[qelim rejected] " << goals->to_string().substr(0, 200)
                << "\n";
    return {input, false};
  }
  const SExpr& goal = (*goals)[1];
  std::vector<TermPtr> conjuncts;
  auto lookup = [&](const std::string& n) -> std::optional<Sort> {
    auto it = names.find(n);
    if (it != names.end()) return it->second.second;
    // Names the solver invented (skolem etc.) make the result unusable.
    return std::nullopt;
  };
  try {
    for (size_t i = 1; i < goal.size(); ++i) {
      const SExpr& item = goal[i];
      if (item.is_atom && !item.atom.empty() && item.atom[0] == ':') {
        ++i;  // skip keyword and its value
        continue;
      }
      conjuncts.push_back(smtlib::parse_term(item, lookup));
    }
  } catch (const smtlib::ParseError&) {
    im.qe_cache[key] = {false, input};
    return {input, false};
  }
  TermPtr result = normalize(tm::conj(std::move(conjuncts)));
  if (has_quantifier(result)) {
    im.qe_cache[key] = {false, input};
    return {input, false};
  }
  // Translate smt2 names back into the term algebra (primed refs).
  std::map<VarRef, TermPtr> back;
  for (const auto& [n, info] : names) {
    if (info.first.primed) back[{n, false}] = tm::var(info.first.name, true);
  }
  result = substitute(result, back);
  im.qe_cache[key] = {true, result};
  return {result, true};
}

std::string SmtSession::backend_description() const {
  std::string s;
  for (const auto& a : impl_->argv) {
    if (!s.empty()) s += " ";
    s += a;
  }
  return s;
}

}  // namespace issy::smt
