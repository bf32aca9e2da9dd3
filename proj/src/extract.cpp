#include "issy/extract.hpp"

#include <map>
#include <set>
#include <sstream>

namespace issy::extract {

using solver::AccelLemma;
using solver::Region;
using solver::SolveOutcome;
using smt::Tri;

namespace {

struct AssignForm {
  TermPtr cond;  // prime-free part of the guard
  std::vector<Assign> assigns;
};

// Splits a guard into prime-free condition and one v' = e assignment per
// primed variable. Returns nullopt when any primed constraint is not of
// that shape.
std::optional<AssignForm> assignment_form(const TermPtr& guard,
                                          const VarEnv& env) {
  TermPtr g = normalize(guard);
  std::vector<TermPtr> conjuncts;
  if (g->is_app(Op::And))
    conjuncts = g->args;
  else
    conjuncts = {g};

  AssignForm out;
  std::vector<TermPtr> conds;
  std::set<std::string> assigned;
  for (const auto& c : conjuncts) {
    if (!mentions_primed(c)) {
      conds.push_back(c);
      continue;
    }
    if (c->is_app(Op::Eq) && c->args.size() == 2) {
      const TermPtr& a = c->args[0];
      const TermPtr& b = c->args[1];
      const TermPtr* lhs = nullptr;
      const TermPtr* rhs = nullptr;
      if (a->is_var() && a->primed && !mentions_primed(b)) {
        lhs = &a;
        rhs = &b;
      } else if (b->is_var() && b->primed && !mentions_primed(a)) {
        lhs = &b;
        rhs = &a;
      }
      if (lhs) {
        if (!assigned.insert((*lhs)->var).second)
          return std::nullopt;  // doubly constrained
        out.assigns.push_back({(*lhs)->var, *rhs});
        continue;
      }
    }
    return std::nullopt;
  }
  (void)env;
  out.cond = tm::conj(std::move(conds));
  return out;
}

// Completes the assignment tuple with keep-equalities and returns the
// substitution (next-state value of every state variable).
std::map<VarRef, TermPtr> next_state_subst(const AssignForm& form,
                                           const VarEnv& env) {
  std::map<VarRef, TermPtr> subst;
  for (const auto& a : form.assigns) subst[{a.var, false}] = a.expr;
  for (const auto& e : env.states())
    if (!subst.count({e.name, false}))
      subst[{e.name, false}] = tm::var(e.name);
  return subst;
}

std::vector<Assign> complete_assigns(const AssignForm& form,
                                     const VarEnv& env) {
  std::vector<Assign> out = form.assigns;
  std::set<std::string> assigned;
  for (const auto& a : form.assigns) assigned.insert(a.var);
  for (const auto& e : env.states())
    if (!assigned.count(e.name))
      out.push_back({e.name, tm::var(e.name)});  // keep
  return out;
}

}  // namespace

AbstractProgram extract_strategy(const SymbolicGame& g,
                                 const SolveOutcome& outcome,
                                 smt::SmtSession& session) {
  if (outcome.verdict != SolveOutcome::Verdict::Realizable)
    throw NotRealizable();
  if (g.objective != WinCond::Safety && g.objective != WinCond::Reachability)
    throw ExtractUnsupported(g.locations[g.initial].name,
                             "only Safety and Reachability strategies are "
                             "extracted");

  const VarEnv& env = g.env;
  size_t n = g.locations.size();
  AbstractProgram prog;
  prog.env = env;
  prog.initial = g.initial;
  for (const auto& l : g.locations) {
    prog.loc_names.push_back(l.name);
    prog.loc_colors.push_back(l.color);
  }
  prog.branches.assign(n, {});

  const Region& win = outcome.system_region;
  bool reach = g.objective == WinCond::Reachability;

  // Layered targets, innermost first (reachability); safety uses a single
  // layer: stay in the winning region.
  std::vector<Region> layers;
  if (reach) {
    layers = outcome.layers;
  } else {
    layers = {win};
  }

  auto membership = [&](const Region& r, size_t to,
                        const std::map<VarRef, TermPtr>& subst) {
    TermPtr in_region = normalize(tm::conj(
        {r.at(to), g.locations[to].domain}));
    return normalize(substitute(in_region, subst));
  };

  for (size_t loc = 0; loc < n; ++loc) {
    // Skip locations with no winning states; they are never entered.
    auto sat = session.check_sat(
        {normalize(tm::conj({win.at(loc), g.locations[loc].domain}))}, env);
    if (sat.verdict == smt::SatResult::Verdict::Unsat) continue;

    std::vector<Branch>& out = prog.branches[loc];
    std::vector<std::string> skipped_transitions;

    auto push_branch = [&](Branch b) {
      for (const auto& known : out)
        if (known.next_loc == b.next_loc && !known.ranked_loop &&
            !b.ranked_loop && structural_equal(known.cond, b.cond))
          return;  // shadowed by an identical earlier branch
      out.push_back(std::move(b));
    };

    // Step branches (reachability): lowest layer index first, then
    // declaration order; each drives the play one layer inward.
    if (reach) {
      for (size_t k = 1; k < layers.size(); ++k) {
        for (const auto* t : g.out(loc)) {
          auto form = assignment_form(t->guard, env);
          if (!form) {
            skipped_transitions.push_back(g.locations[t->to].name);
            continue;
          }
          auto subst = next_state_subst(*form, env);
          TermPtr cond = normalize(tm::conj(
              {form->cond, membership(layers[k - 1], t->to, subst)}));
          if (cond->is_false()) continue;
          // useful only if it can fire on states this layer added
          TermPtr layer_now = normalize(tm::conj(
              {layers[k].at(loc), tm::neg(layers[k - 1].at(loc))}));
          auto useful = session.check_sat(
              {normalize(
                  tm::conj({layer_now, g.locations[loc].domain, cond}))},
              env);
          if (useful.verdict != smt::SatResult::Verdict::Sat) continue;
          Branch b;
          b.cond = cond;
          b.assigns = complete_assigns(*form, env);
          b.next_loc = t->to;
          push_branch(std::move(b));
        }
      }
    }

    // Lemma branches: repeat the rank-decreasing self-loop until the
    // sub-target opens up.
    for (const auto& lem : outcome.lemmas) {
      if (lem.location != loc) continue;
      // Find an assignment-like self-loop whose fixed choice realizes the
      // descent for every input.
      bool installed = false;
      for (const auto* t : g.out(loc)) {
        if (t->to != loc) continue;
        auto form = assignment_form(t->guard, env);
        if (!form) continue;
        auto subst = next_state_subst(*form, env);
        TermPtr inv_next = normalize(substitute(
            normalize(tm::conj({lem.invariant, g.locations[loc].domain})),
            subst));
        TermPtr rank_next = normalize(substitute(lem.rank, subst));
        TermPtr decreased = tm::le(
            rank_next, tm::sub(lem.rank, tm::constant(lem.epsilon)));
        TermPtr base_next = normalize(substitute(lem.base, subst));
        TermPtr step_ok = tm::conj(
            {form->cond,
             tm::disj({tm::conj({inv_next, decreased}), base_next})});
        // must hold for every input choice
        std::vector<std::pair<std::string, Sort>> inputs;
        for (const auto& fv : free_vars(step_ok)) {
          const auto* e = env.lookup(fv.name);
          if (e && e->kind == VarKind::Input && !fv.primed)
            inputs.push_back({fv.name, e->sort});
        }
        TermPtr requirement =
            session.qelim(tm::forall(inputs, step_ok), env).term;
        Tri ok = session.check_implies(
            normalize(tm::conj({lem.invariant, tm::neg(lem.base)})),
            requirement, env);
        if (ok != Tri::True) continue;
        Branch b;
        b.cond = normalize(tm::conj({lem.invariant, tm::neg(lem.base)}));
        b.assigns = complete_assigns(*form, env);
        b.next_loc = loc;
        b.ranked_loop = true;
        b.exit_cond = lem.base;
        b.rank = lem.rank;
        b.epsilon = lem.epsilon;
        push_branch(std::move(b));
        installed = true;
        break;
      }
      if (!installed)
        throw ExtractUnsupported(
            g.locations[loc].name,
            "no assignment-like self-loop realizes the acceleration lemma");
    }

    // Fallback branches keep the play inside the winning region (covers
    // target locations of reachability games and all of safety).
    for (const auto* t : g.out(loc)) {
      auto form = assignment_form(t->guard, env);
      if (!form) {
        skipped_transitions.push_back(g.locations[t->to].name);
        continue;
      }
      auto subst = next_state_subst(*form, env);
      TermPtr cond =
          normalize(tm::conj({form->cond, membership(win, t->to, subst)}));
      if (cond->is_false()) continue;
      Branch b;
      b.cond = cond;
      b.assigns = complete_assigns(*form, env);
      b.next_loc = t->to;
      push_branch(std::move(b));
    }

    // Exhaustiveness: on the winning region every input must fire a branch.
    std::vector<TermPtr> conds;
    for (const auto& b : out) conds.push_back(b.cond);
    TermPtr any = tm::disj(std::move(conds));
    std::vector<std::pair<std::string, Sort>> inputs;
    for (const auto& e : env.inputs()) inputs.push_back({e.name, e.sort});
    TermPtr closed = session.qelim(tm::forall(inputs, any), env).term;
    Tri exhaustive = session.check_implies(
        normalize(tm::conj({win.at(loc), g.locations[loc].domain})), closed,
        env);
    if (exhaustive != Tri::True) {
      std::string why = "branch conditions are not exhaustive";
      if (!skipped_transitions.empty())
        why += " (transition to " + skipped_transitions[0] +
               " is not assignment-like)";
      throw ExtractUnsupported(g.locations[loc].name, why);
    }
  }
  return prog;
}

// --- C emission -----------------------------------------------------------------

namespace {

const char* c_type(Sort s) {
  switch (s) {
    case Sort::Bool: return "int";
    case Sort::Int: return "long long";
    case Sort::Real: return "double";
  }
  return "int";
}

bool is_real_expr(const TermPtr& t, const VarEnv& env) {
  switch (t->kind) {
    case Term::Kind::Const:
      return !t->value.is_integer();
    case Term::Kind::Var: {
      const auto* e = env.lookup(t->var);
      return e && e->sort == Sort::Real;
    }
    case Term::Kind::App: {
      if (t->op == Op::Div || t->op == Op::ToReal) return true;
      for (const auto& a : t->args)
        if (is_real_expr(a, env)) return true;
      return false;
    }
    default:
      return false;
  }
}

struct CEmitter {
  const VarEnv& env;

  std::string expr(const TermPtr& t) {
    switch (t->kind) {
      case Term::Kind::Const: {
        const Rational& r = t->value;
        if (r.is_integer()) return "(" + std::to_string(r.num()) + "LL)";
        std::ostringstream os;
        os << "(" << r.num() << ".0/" << r.den() << ".0)";
        return os.str();
      }
      case Term::Kind::BoolConst:
        return t->bval ? "1" : "0";
      case Term::Kind::Var:
        return t->var;
      case Term::Kind::Quant:
        throw std::invalid_argument("quantifier reached C emission");
      case Term::Kind::App:
        break;
    }
    auto nary = [&](const char* op) {
      std::string s = "(";
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) s += std::string(" ") + op + " ";
        s += expr(t->args[i]);
      }
      return s + ")";
    };
    auto cmp_chain = [&](const char* op) {
      std::string s = "(";
      for (size_t i = 0; i + 1 < t->args.size(); ++i) {
        if (i) s += " && ";
        s += "(" + expr(t->args[i]) + " " + op + " " + expr(t->args[i + 1]) +
             ")";
      }
      return s + ")";
    };
    switch (t->op) {
      case Op::And: return nary("&&");
      case Op::Or: return nary("||");
      case Op::Not: return "(!" + expr(t->args[0]) + ")";
      case Op::Implies: {
        std::string s = expr(t->args.back());
        for (size_t i = t->args.size() - 1; i-- > 0;)
          s = "((!" + expr(t->args[i]) + ") || " + s + ")";
        return s;
      }
      case Op::Ite:
        return "(" + expr(t->args[0]) + " ? " + expr(t->args[1]) + " : " +
               expr(t->args[2]) + ")";
      case Op::Eq: return cmp_chain("==");
      case Op::Distinct: {
        std::string s = "(";
        bool first = true;
        for (size_t i = 0; i < t->args.size(); ++i)
          for (size_t j = i + 1; j < t->args.size(); ++j) {
            if (!first) s += " && ";
            first = false;
            s += "(" + expr(t->args[i]) + " != " + expr(t->args[j]) + ")";
          }
        return s + ")";
      }
      case Op::Lt: return cmp_chain("<");
      case Op::Gt: return cmp_chain(">");
      case Op::Le: return cmp_chain("<=");
      case Op::Ge: return cmp_chain(">=");
      case Op::Add: return nary("+");
      case Op::Sub:
        if (t->args.size() == 1) return "(-" + expr(t->args[0]) + ")";
        return nary("-");
      case Op::Mul: return nary("*");
      case Op::Div:
        return "((double)" + expr(t->args[0]) + " / (double)" +
               expr(t->args[1]) + ")";
      case Op::Mod:
        return "imod(" + expr(t->args[0]) + ", " + expr(t->args[1]) + ")";
      case Op::Abs:
        return std::string(is_real_expr(t->args[0], env) ? "rabs" : "iabs") +
               "(" + expr(t->args[0]) + ")";
      case Op::ToReal:
        return "((double)" + expr(t->args[0]) + ")";
    }
    return "0";
  }
};

}  // namespace

std::string emit_c(const AbstractProgram& p) {
  CEmitter ce{p.env};
  std::ostringstream os;
  auto inputs = p.env.inputs();
  auto states = p.env.states();

  os << "enum location {";
  for (size_t i = 0; i < p.loc_names.size(); ++i) {
    if (i) os << ",";
    os << " LOC_" << i;
  }
  os << " };\n\n";
  os << "static const char *loc_name[] = {";
  for (size_t i = 0; i < p.loc_names.size(); ++i) {
    if (i) os << ",";
    os << " \"" << p.loc_names[i] << "\"";
  }
  os << " };\n\n";

  os << "int main(void) {\n";
  for (const auto& e : states)
    os << "  " << c_type(e.sort) << " " << e.name << " = 0;\n";
  for (const auto& e : inputs) {
    os << "  " << c_type(e.sort) << " " << e.name << " = 0;\n";
    os << "  (void)" << e.name << ";\n";
  }
  os << "  enum location loc = LOC_" << p.initial << ";\n\n";

  auto emit_reader = [&](const std::vector<VarEnv::Entry>& vars,
                         const std::string& label) {
    os << "  {\n";
    if (vars.empty()) {
      // no variables to read: consume one tick token per step anyway so the
      // driver controls pacing
      os << "    long long tick;\n";
      os << "    int got = scanf(\"%lld\", &tick);\n";
      os << "    if (got == EOF) return 0;\n";
      os << "    if (got != 1) exit(4);\n";
      os << "  }\n";
      return;
    }
    os << "    double vr[" << vars.size() << "];\n";
    os << "    long long vi[" << vars.size() << "];\n";
    os << "    static const int is_real_" << label << "[" << vars.size()
       << "] = {";
    for (size_t i = 0; i < vars.size(); ++i) {
      if (i) os << ",";
      os << (vars[i].sort == Sort::Real ? "1" : "0");
    }
    os << "};\n";
    os << "    if (!read_values(" << vars.size() << ", vr, vi, is_real_"
       << label << ")) return 0;\n";
    for (size_t i = 0; i < vars.size(); ++i) {
      if (vars[i].sort == Sort::Real)
        os << "    " << vars[i].name << " = vr[" << i << "];\n";
      else if (vars[i].sort == Sort::Int)
        os << "    " << vars[i].name << " = vi[" << i << "];\n";
      else
        os << "    " << vars[i].name << " = vi[" << i << "] != 0;\n";
    }
    os << "  }\n";
  };

  os << "  /* initial state values, declared state order */\n";
  emit_reader(states, "init");

  os << "  print_state: ;\n";
  os << "  printf(\"%s\", loc_name[loc]);\n";
  for (const auto& e : states) {
    if (e.sort == Sort::Real)
      os << "  printf(\" %.17g\", " << e.name << ");\n";
    else if (e.sort == Sort::Int)
      os << "  printf(\" %lld\", " << e.name << ");\n";
    else
      os << "  printf(\" %d\", " << e.name << " ? 1 : 0);\n";
  }
  os << "  printf(\"\\n\");\n";
  os << "  fflush(stdout);\n\n";

  os << "  for (;;) {\n";
  os << "    /* one input line per step, declared input order */\n";
  {
    std::ostringstream tmp;
    std::swap(tmp, os);
    emit_reader(inputs, "step");
    std::string body = os.str();
    std::swap(tmp, os);
    // indent the reader two extra spaces
    std::istringstream is(body);
    std::string line;
    while (std::getline(is, line)) os << "  " << line << "\n";
  }

  os << "    switch (loc) {\n";
  for (size_t loc = 0; loc < p.branches.size(); ++loc) {
    os << "      case LOC_" << loc << ":\n";
    for (const auto& b : p.branches[loc]) {
      os << "        if (" << ce.expr(b.cond) << ") {\n";
      if (b.ranked_loop) {
        os << "          for (;;) {\n";
        // simultaneous assignment via temporaries
        for (size_t i = 0; i < b.assigns.size(); ++i) {
          const auto* e = p.env.lookup(b.assigns[i].var);
          os << "            " << c_type(e ? e->sort : Sort::Int) << " nv"
             << i << " = " << ce.expr(b.assigns[i].expr) << ";\n";
        }
        for (size_t i = 0; i < b.assigns.size(); ++i)
          os << "            " << b.assigns[i].var << " = nv" << i << ";\n";
        os << "            if (" << ce.expr(b.exit_cond) << ") break;\n";
        os << "            printf(\"%s\", loc_name[loc]);\n";
        for (const auto& e : states) {
          if (e.sort == Sort::Real)
            os << "            printf(\" %.17g\", " << e.name << ");\n";
          else if (e.sort == Sort::Int)
            os << "            printf(\" %lld\", " << e.name << ");\n";
          else
            os << "            printf(\" %d\", " << e.name << " ? 1 : 0);\n";
        }
        os << "            printf(\"\\n\");\n";
        os << "            fflush(stdout);\n";
        {
          std::ostringstream tmp;
          std::swap(tmp, os);
          emit_reader(inputs, "loop" + std::to_string(loc));
          std::string body = os.str();
          std::swap(tmp, os);
          std::istringstream is(body);
          std::string line;
          while (std::getline(is, line)) os << "        " << line << "\n";
        }
        os << "          }\n";
        os << "          loc = LOC_" << b.next_loc << ";\n";
        os << "          goto print_state;\n";
      } else {
        for (size_t i = 0; i < b.assigns.size(); ++i) {
          const auto* e = p.env.lookup(b.assigns[i].var);
          os << "          " << c_type(e ? e->sort : Sort::Int) << " nv" << i
             << " = " << ce.expr(b.assigns[i].expr) << ";\n";
        }
        for (size_t i = 0; i < b.assigns.size(); ++i)
          os << "          " << b.assigns[i].var << " = nv" << i << ";\n";
        os << "          loc = LOC_" << b.next_loc << ";\n";
        os << "          goto print_state;\n";
      }
      os << "        }\n";
    }
    os << "        exit(5); /* no branch fired: outside the winning region */\n";
  }
  os << "    }\n";
  os << "  }\n";
  os << "}\n";

  // Assemble with only the helpers the body references, keeping the file
  // warning-free under -Wall.
  std::string body = os.str();
  std::ostringstream prog;
  prog << "#include <stdio.h>\n";
  prog << "#include <stdlib.h>\n\n";
  if (body.find("imod(") != std::string::npos) {
    prog << "/* Euclidean remainder: result in [0, |b|) */\n";
    prog << "static long long imod(long long a, long long b) {\n";
    prog << "  long long m = b < 0 ? -b : b;\n";
    prog << "  long long r = a % m;\n";
    prog << "  return r < 0 ? r + m : r;\n";
    prog << "}\n";
  }
  if (body.find("iabs(") != std::string::npos)
    prog << "static long long iabs(long long a) { return a < 0 ? -a : a; }\n";
  if (body.find("rabs(") != std::string::npos)
    prog << "static double rabs(double a) { return a < 0 ? -a : a; }\n";
  if (body.find("read_values(") != std::string::npos) {
    prog << "/* reads n values; 0 on EOF, exit(4) on malformed input */\n";
    prog << "static int read_values(int n, double *out_r, long long *out_i,\n";
    prog << "                       const int *is_real) {\n";
    prog << "  for (int k = 0; k < n; ++k) {\n";
    prog << "    int got = is_real[k] ? scanf(\"%lf\", &out_r[k])\n";
    prog << "                         : scanf(\"%lld\", &out_i[k]);\n";
    prog << "    if (got == EOF) return 0;\n";
    prog << "    if (got != 1) exit(4);\n";
    prog << "  }\n";
    prog << "  return 1;\n";
    prog << "}\n";
  }
  prog << "\n" << body;
  return prog.str();
}

}  // namespace issy::extract
