// issy-smt: a small SMT-LIB2 solver for quantified linear arithmetic over
// Bool/Int/Real. Serves as the fallback backend for the toolchain when no
// external solver (z3) is installed. Speaks the same protocol subset the
// toolchain emits: declare-const, assert, push/pop, check-sat, get-model,
// (apply qe).

#include <chrono>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "issy/sexpr.hpp"
#include "issy/smtcore.hpp"
#include "issy/smtlib.hpp"
#include "issy/terms.hpp"

using namespace issy;

namespace {

struct Frame {
  std::vector<std::pair<std::string, Sort>> decls;
  std::vector<TermPtr> asserts;
};

struct Session {
  std::vector<Frame> frames{Frame{}};
  std::optional<smtcore::CheckResult> last;
  int64_t timeout_ms = 0;  // 0 = none

  smtcore::SymTab symtab() const {
    smtcore::SymTab t;
    for (const auto& f : frames)
      for (const auto& [n, s] : f.decls) t[n] = s;
    return t;
  }

  std::vector<TermPtr> assertions() const {
    std::vector<TermPtr> out;
    for (const auto& f : frames)
      for (const auto& a : f.asserts) out.push_back(a);
    return out;
  }

  std::optional<Sort> lookup(const std::string& n) const {
    for (auto it = frames.rbegin(); it != frames.rend(); ++it)
      for (const auto& [dn, ds] : it->decls)
        if (dn == n) return ds;
    return std::nullopt;
  }

  smtcore::Budget budget() const {
    smtcore::Budget b;
    if (timeout_ms > 0)
      b.deadline = std::chrono::steady_clock::now() +
                   std::chrono::milliseconds(timeout_ms);
    return b;
  }
};

void print_value(std::ostream& os, const Value& v) {
  switch (v.sort) {
    case Sort::Bool:
      os << (v.b ? "true" : "false");
      return;
    case Sort::Int:
      if (v.r.num() < 0)
        os << "(- " << -v.r.num() << ")";
      else
        os << v.r.num();
      return;
    case Sort::Real: {
      Rational a = v.r.abs();
      std::string body = a.is_integer()
                             ? std::to_string(a.num()) + ".0"
                             : "(/ " + std::to_string(a.num()) + ".0 " +
                                   std::to_string(a.den()) + ".0)";
      if (v.r.is_negative())
        os << "(- " << body << ")";
      else
        os << body;
      return;
    }
  }
}

int run() {
  Session s;
  std::string buffer;
  std::string line;
  size_t pos = 0;

  auto say = [](const std::string& m) {
    std::cout << m << "\n" << std::flush;
  };
  auto err = [&](const std::string& m) { say("(error \"" + m + "\")"); };

  while (true) {
    // Pull one complete s-expression, reading more input as needed.
    std::string perr;
    auto e = parse_one_sexpr(buffer, &pos, &perr);
    if (!e) {
      if (!perr.empty() && perr != "unbalanced parenthesis") {
        err(perr);
        buffer.clear();
        pos = 0;
        continue;
      }
      if (!std::getline(std::cin, line)) break;
      // Trim consumed prefix occasionally to keep the buffer small.
      if (pos > 65536) {
        buffer.erase(0, pos);
        pos = 0;
      }
      buffer += line;
      buffer += "\n";
      continue;
    }
    const SExpr& cmd = *e;
    if (!cmd.is_list() || cmd.items.empty() || !cmd.items[0].is_atom) {
      err("expected command");
      continue;
    }
    const std::string& head = cmd.items[0].atom;
    try {
      if (head == "exit") return 0;
      if (head == "set-logic" || head == "set-info") continue;
      if (head == "set-option") {
        if (cmd.size() == 3 && cmd[1].is_atom && cmd[1].atom == ":timeout" &&
            cmd[2].is_atom)
          s.timeout_ms = std::stoll(cmd[2].atom);
        continue;
      }
      if (head == "echo") {
        std::string text = cmd.size() > 1 ? cmd[1].atom : "";
        if (text.size() >= 2 && text.front() == '"' && text.back() == '"')
          text = text.substr(1, text.size() - 2);
        say(text);
        continue;
      }
      if (head == "reset") {
        s = Session{};
        continue;
      }
      if (head == "push" || head == "pop") {
        int n = cmd.size() > 1 && cmd[1].is_atom ? std::stoi(cmd[1].atom) : 1;
        for (int i = 0; i < n; ++i) {
          if (head == "push") {
            s.frames.push_back(Frame{});
          } else if (s.frames.size() > 1) {
            s.frames.pop_back();
          } else {
            err("pop on empty stack");
          }
        }
        s.last.reset();
        continue;
      }
      if (head == "declare-const" || head == "declare-fun") {
        size_t sort_at = head == "declare-const" ? 2 : 3;
        if (cmd.size() != sort_at + 1 || !cmd[1].is_atom) {
          err("malformed " + head);
          continue;
        }
        if (head == "declare-fun" &&
            (!cmd[2].is_list() || !cmd[2].items.empty())) {
          err("only 0-ary declare-fun supported");
          continue;
        }
        auto sort = smtlib::parse_sort(cmd[sort_at]);
        if (!sort) {
          err("unknown sort");
          continue;
        }
        s.frames.back().decls.push_back({cmd[1].atom, *sort});
        continue;
      }
      if (head == "assert") {
        if (cmd.size() != 2) {
          err("malformed assert");
          continue;
        }
        TermPtr t = smtlib::parse_term(
            cmd[1], [&](const std::string& n) { return s.lookup(n); });
        s.frames.back().asserts.push_back(std::move(t));
        continue;
      }
      if (head == "check-sat") {
        auto r = smtcore::check_sat(s.assertions(), s.symtab(), s.budget());
        s.last = r;
        switch (r.verdict) {
          case smtcore::Verdict::Sat: say("sat"); break;
          case smtcore::Verdict::Unsat: say("unsat"); break;
          case smtcore::Verdict::Unknown: say("unknown"); break;
        }
        continue;
      }
      if (head == "get-model") {
        if (!s.last || s.last->verdict != smtcore::Verdict::Sat) {
          err("model is not available");
          continue;
        }
        std::ostringstream os;
        os << "(";
        for (const auto& [n, sort] : s.symtab()) {
          Value v;
          auto it = s.last->model.find(n);
          if (it != s.last->model.end()) {
            v = it->second;
          } else {
            // Unconstrained symbols default to 0 / false.
            v = sort == Sort::Bool ? Value::of_bool(false)
                : sort == Sort::Int ? Value::of_int(Rational(0))
                                    : Value::of_real(Rational(0));
            v.sort = sort;
          }
          v.sort = sort;
          os << "\n  (define-fun " << n << " () " << to_string(sort) << " ";
          print_value(os, v);
          os << ")";
        }
        os << "\n)";
        say(os.str());
        continue;
      }
      if (head == "apply") {
        // Only the qe tactic is supported; mirrors z3's goal output.
        TermPtr whole = tm::conj(s.assertions());
        auto r = smtcore::eliminate_quantifiers(whole, s.symtab(), s.budget());
        TermPtr out = normalize(r.term);
        std::ostringstream os;
        os << "(goals\n(goal";
        if (!out->is_true()) os << "\n  " << serialize_smt2(out);
        os << "\n  :precision precise :depth 1)\n)";
        say(os.str());
        continue;
      }
      err("unsupported command " + head);
    } catch (const smtlib::ParseError& pe) {
      err(pe.what());
    } catch (const overflow_error&) {
      err("arithmetic overflow");
    } catch (const std::exception& ex) {
      err(ex.what());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--version") {
      std::cout << "issy-smt 0.1\n";
      return 0;
    }
    // `-in` style flags accepted for z3 command-line compatibility.
  }
  std::ios::sync_with_stdio(false);
  return run();
}
