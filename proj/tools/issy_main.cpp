// issy: compiler and solver for Issy specifications of infinite-state
// reactive systems. `compile` lowers .issy to the LLissy interchange format,
// `check` reports diagnostics, `solve` decides realizability and optionally
// extracts a C controller (--synt).

#include <CLI11.hpp>
#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "issy/extract.hpp"
#include "issy/frontend.hpp"
#include "issy/llissy.hpp"
#include "issy/logic.hpp"
#include "issy/smt.hpp"
#include "issy/solver.hpp"

using namespace issy;

namespace {

constexpr int kExitRealizable = 0;
constexpr int kExitUnrealizable = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitInput = 3;
constexpr int kExitExternal = 4;

struct Options {
  std::string input;
  std::string output;
  int pruning = 0;
  std::string accel = "geometric";
  bool synt = false;
  bool portfolio = false;
  std::string smt_cmd;
  std::string ltl_cmd;
  int budget = 100;
  double timeout_s = 1200;  // 20-minute wall clock
  std::string format;       // "", "issy", "llissy"
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// diagnostics go to stderr as file:line:col
void report(const std::vector<Diagnostic>& diags, const std::string& file) {
  for (const auto& d : diags)
    std::cerr << format_diagnostic(d, file) << "\n";
}

std::optional<Spec> load_spec(const Options& opt, int* exit_code) {
  auto text = read_file(opt.input);
  if (!text) {
    std::cerr << opt.input << ": cannot read file\n";
    *exit_code = kExitInput;
    return std::nullopt;
  }
  bool as_llissy = opt.format == "llissy" ||
                   (opt.format.empty() && ends_with(opt.input, ".llissy"));
  if (as_llissy) {
    auto r = llissy::parse_llissy(*text);
    report(r.diagnostics, opt.input);
    if (!r.spec) {
      *exit_code = kExitInput;
      return std::nullopt;
    }
    return r.spec;
  }
  auto r = front::load_issy(*text);
  report(r.diagnostics, opt.input);
  if (!r.spec) {
    *exit_code = kExitInput;
    return std::nullopt;
  }
  return r.spec;
}

int run_compile(const Options& opt) {
  int code = 0;
  auto spec = load_spec(opt, &code);
  if (!spec) return code;
  std::string out = llissy::emit_llissy(*spec);
  if (opt.output.empty()) {
    std::cout << out;
  } else {
    std::ofstream os(opt.output);
    if (!os.good()) {
      std::cerr << opt.output << ": cannot write file\n";
      return kExitInput;
    }
    os << out;
  }
  return 0;
}

int run_check(const Options& opt) {
  int code = 0;
  auto spec = load_spec(opt, &code);
  return spec ? 0 : code;
}

solver::SolveOutcome solve_once(const SymbolicGame& arena, const Options& opt,
                                bool accelerate,
                                std::chrono::steady_clock::time_point deadline) {
  smt::SolverConfig cfg;
  cfg.command = opt.smt_cmd;
  cfg.global_deadline = deadline;
  smt::SmtSession session(cfg);
  solver::SolveOptions sopts;
  sopts.iteration_budget = opt.budget;
  sopts.accelerate = accelerate;
  sopts.deadline = deadline;
  solver::GameSolver gs(arena, session, sopts);
  return gs.solve();
}

int run_solve(const Options& opt) {
  int code = 0;
  auto spec = load_spec(opt, &code);
  if (!spec) return code;

  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(
                      static_cast<long long>(opt.timeout_s * 1000));

  SymbolicGame arena;
  try {
    logic::LtlTranslatorConfig ltl_cfg;
    ltl_cfg.command = opt.ltl_cmd;
    arena = logic::build_arena(*spec, ltl_cfg);
  } catch (const logic::TranslatorError& e) {
    std::cerr << "ltl translation failed: " << e.what() << "\n";
    return kExitExternal;
  } catch (const std::exception& e) {
    std::cerr << "arena construction failed: " << e.what() << "\n";
    return kExitInput;
  }

  solver::SolveOutcome outcome;
  try {
    if (opt.portfolio) {
      // two isolated configurations race; first conclusive verdict wins
      solver::SolveOutcome results[2];
      std::thread a([&] { results[0] = solve_once(arena, opt, true, deadline); });
      std::thread b([&] { results[1] = solve_once(arena, opt, false, deadline); });
      a.join();
      b.join();
      outcome = results[0];
      if (outcome.verdict == solver::SolveOutcome::Verdict::Unknown)
        outcome = results[1];
    } else {
      outcome = solve_once(arena, opt, opt.accel == "geometric", deadline);
    }
  } catch (const smt::BackendError& e) {
    std::cerr << "smt backend failed: " << e.what() << "\n";
    return kExitExternal;
  }

  switch (outcome.verdict) {
    case solver::SolveOutcome::Verdict::Realizable: {
      std::cout << "REALIZABLE\n";
      if (opt.synt) {
        try {
          smt::SolverConfig cfg;
          cfg.command = opt.smt_cmd;
          smt::SmtSession session(cfg);
          auto prog = extract::extract_strategy(arena, outcome, session);
          std::string c_src = extract::emit_c(prog);
          std::string path = opt.output.empty() ? opt.input + ".c"
                                                : opt.output;
          std::ofstream os(path);
          if (!os.good()) {
            std::cerr << path << ": cannot write file\n";
            return kExitInput;
          }
          os << c_src;
          std::cerr << "controller written to " << path << "\n";
        } catch (const extract::ExtractUnsupported& e) {
          std::cerr << "synthesis failed: " << e.what() << "\n";
          return kExitUnknown;
        }
      }
      return kExitRealizable;
    }
    case solver::SolveOutcome::Verdict::Unrealizable:
      std::cout << "UNREALIZABLE\n";
      return kExitUnrealizable;
    default:
      std::cout << "UNKNOWN(" << outcome.unknown_reason << ")\n";
      return kExitUnknown;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"issy: specification, realizability, and synthesis for "
               "infinite-state reactive systems"};
  app.require_subcommand(0, 1);

  Options opt;
  bool version = false;
  app.add_flag("--version", version, "print version and backend information");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("input", opt.input, "input file (.issy or .llissy)")
        ->required();
    cmd->add_option("-o,--output", opt.output, "output file");
    cmd->add_option("--format", opt.format, "input format override")
        ->check(CLI::IsMember({"issy", "llissy"}));
  };

  CLI::App* compile = app.add_subcommand("compile", "compile Issy to LLissy");
  add_common(compile);

  CLI::App* check = app.add_subcommand("check", "parse and report diagnostics");
  add_common(check);

  CLI::App* solve = app.add_subcommand(
      "solve", "decide realizability (REALIZABLE/UNREALIZABLE/UNKNOWN)");
  add_common(solve);
  solve->add_option("--pruning", opt.pruning,
                    "monitor pruning level (only 0 is supported)");
  solve->add_option("--accel-attr", opt.accel,
                    "attractor acceleration method")
      ->check(CLI::IsMember({"geometric", "none"}));
  solve->add_flag("--synt", opt.synt, "extract a C controller on success");
  solve->add_flag("--portfolio", opt.portfolio,
                  "race both acceleration settings");
  solve->add_option("--smt-solver", opt.smt_cmd,
                    "SMT backend command (default: z3 -in, or the bundled "
                    "issy-smt)");
  solve->add_option("--ltl-translator", opt.ltl_cmd,
                    "LTL-to-automaton command (default: ltl2tgba, or the "
                    "bundled issy-ltl)");
  solve->add_option("--budget", opt.budget, "fixpoint iteration budget");
  solve->add_option("--timeout", opt.timeout_s, "wall-clock budget, seconds");

  CLI11_PARSE(app, argc, argv);

  if (version) {
    std::cout << "issy 0.1\n";
    auto smt_argv = smt::resolve_smt_command(opt.smt_cmd);
    std::cout << "smt backend: ";
    for (const auto& a : smt_argv) std::cout << a << " ";
    std::cout << "(" << smt::backend_version_line(smt_argv) << ")\n";
    auto ltl_argv = logic::resolve_ltl_command(opt.ltl_cmd);
    std::cout << "ltl translator: ";
    for (const auto& a : ltl_argv) std::cout << a << " ";
    std::cout << "(" << smt::backend_version_line({ltl_argv[0]}) << ")\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitInput;
  }
  if (opt.timeout_s <= 0) {
    std::cerr << "timeout must be positive\n";
    return kExitInput;
  }
  if (opt.pruning != 0) {
    std::cerr << "monitor pruning not supported (levels 1-3 out of scope)\n";
    return kExitInput;
  }

  try {
    if (compile->parsed()) return run_compile(opt);
    if (check->parsed()) return run_check(opt);
    if (solve->parsed()) return run_solve(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
