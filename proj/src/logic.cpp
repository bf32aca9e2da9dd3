#include "issy/logic.hpp"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unistd.h>

#include "issy/subprocess.hpp"

namespace issy::logic {

std::optional<size_t> AtomTable::find(const TermPtr& normalized_atom) const {
  for (size_t i = 0; i < atoms.size(); ++i)
    if (structural_equal(atoms[i], normalized_atom)) return i;
  return std::nullopt;
}

size_t AtomTable::intern(const TermPtr& atom) {
  TermPtr n = normalize(atom);
  if (auto i = find(n)) return *i;
  atoms.push_back(n);
  return atoms.size() - 1;
}

namespace {

void collect_rec(const RpltlPtr& f, AtomTable& t) {
  if (f->op == LtlOp::Atom) {
    TermPtr n = normalize(f->atom);
    // Boolean constants are not propositions.
    if (n->kind == Term::Kind::BoolConst) return;
    t.intern(n);
    return;
  }
  for (const auto& k : f->kids) collect_rec(k, t);
}

}  // namespace

AtomTable collect_atoms(const RpltlPtr& f) {
  AtomTable t;
  collect_rec(f, t);
  return t;
}

std::string abstract_to_ltl(const RpltlPtr& f, const AtomTable& t) {
  std::ostringstream os;
  std::function<void(const RpltlPtr&)> walk = [&](const RpltlPtr& g) {
    switch (g->op) {
      case LtlOp::Atom: {
        TermPtr n = normalize(g->atom);
        if (n->is_true()) {
          os << "1";
          return;
        }
        if (n->is_false()) {
          os << "0";
          return;
        }
        auto i = t.find(n);
        if (!i) throw MissingAtom(term_to_string(g->atom));
        os << "p" << *i;
        return;
      }
      case LtlOp::Not:
        os << "!(";
        walk(g->kids[0]);
        os << ")";
        return;
      case LtlOp::And:
      case LtlOp::Or: {
        const char* sep = g->op == LtlOp::And ? " & " : " | ";
        os << "(";
        for (size_t i = 0; i < g->kids.size(); ++i) {
          if (i) os << sep;
          os << "(";
          walk(g->kids[i]);
          os << ")";
        }
        os << ")";
        return;
      }
      case LtlOp::Implies:
      case LtlOp::Iff:
      case LtlOp::Until:
      case LtlOp::WeakUntil:
      case LtlOp::Release: {
        const char* op = g->op == LtlOp::Implies    ? "->"
                         : g->op == LtlOp::Iff      ? "<->"
                         : g->op == LtlOp::Until    ? "U"
                         : g->op == LtlOp::WeakUntil ? "W"
                                                     : "R";
        os << "((";
        walk(g->kids[0]);
        os << ") " << op << " (";
        walk(g->kids[1]);
        os << "))";
        return;
      }
      case LtlOp::Next:
      case LtlOp::Eventually:
      case LtlOp::Globally: {
        const char* op = g->op == LtlOp::Next         ? "X"
                         : g->op == LtlOp::Eventually ? "F"
                                                      : "G";
        os << op << "(";
        walk(g->kids[0]);
        os << ")";
        return;
      }
    }
  };
  walk(f);
  return os.str();
}

namespace {

// NNF of (pos ? f : !f) uses only atoms, literals, && || X G W R.
bool safety_rec(const RpltlPtr& f, bool pos) {
  switch (f->op) {
    case LtlOp::Atom:
      return true;
    case LtlOp::Not:
      return safety_rec(f->kids[0], !pos);
    case LtlOp::And:
    case LtlOp::Or: {
      for (const auto& k : f->kids)
        if (!safety_rec(k, pos)) return false;
      return true;
    }
    case LtlOp::Implies:
      return safety_rec(f->kids[0], !pos) && safety_rec(f->kids[1], pos);
    case LtlOp::Iff:
      return safety_rec(f->kids[0], true) && safety_rec(f->kids[0], false) &&
             safety_rec(f->kids[1], true) && safety_rec(f->kids[1], false);
    case LtlOp::Next:
      return safety_rec(f->kids[0], pos);
    case LtlOp::Eventually:
      return pos ? false : safety_rec(f->kids[0], false);
    case LtlOp::Globally:
      return pos ? safety_rec(f->kids[0], true) : false;
    case LtlOp::Until:
      // positive U is co-safety; !(a U b) = !a R !b
      return pos ? false
                 : safety_rec(f->kids[0], false) &&
                       safety_rec(f->kids[1], false);
    case LtlOp::WeakUntil:
      // !(a W b) introduces an U
      return pos ? safety_rec(f->kids[0], true) &&
                       safety_rec(f->kids[1], true)
                 : false;
    case LtlOp::Release:
      return pos ? safety_rec(f->kids[0], true) &&
                       safety_rec(f->kids[1], true)
                 : false;
  }
  return false;
}

}  // namespace

bool is_syntactic_safety(const RpltlPtr& f) { return safety_rec(f, true); }

// --- external translation -----------------------------------------------------

namespace {

bool executable_on_path(const std::string& prog) {
  if (prog.find('/') != std::string::npos)
    return access(prog.c_str(), X_OK) == 0;
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

std::vector<std::string> resolve_ltl_command(const std::string& override_cmd) {
  if (const char* env = getenv("ISSY_LTL_CMD"); env && *env)
    return split_command(env);
  if (!override_cmd.empty()) return split_command(override_cmd);
  if (executable_on_path("ltl2tgba"))
    return {"ltl2tgba", "--deterministic", "--complete",
            "--colored-parity=max odd", "-f"};
  std::string dir = self_exe_dir();
  if (!dir.empty() && access((dir + "/issy-ltl").c_str(), X_OK) == 0)
    return {dir + "/issy-ltl"};
  return {"ltl2tgba", "--deterministic", "--complete",
          "--colored-parity=max odd", "-f"};
}

bool translator_available(const LtlTranslatorConfig& cfg) {
  auto argv = resolve_ltl_command(cfg.command);
  return !argv.empty() && executable_on_path(argv[0]);
}

std::string translate_ltl(const std::string& ltl,
                          const LtlTranslatorConfig& cfg) {
  if (ltl.empty()) throw TranslatorError(2, "empty formula");
  auto argv = resolve_ltl_command(cfg.command);
  argv.push_back(ltl);
  std::string out;
  try {
    Subprocess p(argv);
    p.close_stdin();
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::milliseconds(cfg.timeout_ms);
    while (!p.stdout_eof()) {
      p.read_some(&out, 200);
      if (std::chrono::steady_clock::now() > deadline)
        throw TranslatorError(124, "translator timed out");
    }
    auto ec = p.wait(2000);
    int code = ec.value_or(-1);
    if (code != 0) throw TranslatorError(code, p.read_stderr());
  } catch (const TranslatorError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw TranslatorError(-1, e.what());
  }
  if (out.find("--END--") == std::string::npos)
    throw TranslatorError(3, "translator produced no automaton");
  return out;
}

// --- automaton import -----------------------------------------------------------

namespace {

// HOA AP indices are positional; the proposition id lives in the AP name
// ("p<k>"), which external translators are free to reorder.
std::vector<size_t> ap_index_map(const hoa::Automaton& a,
                                 const AtomTable& t) {
  std::vector<size_t> map(a.ap_count);
  for (size_t i = 0; i < a.ap_count; ++i) {
    std::string name =
        i < a.ap_names.size() ? a.ap_names[i] : "p" + std::to_string(i);
    size_t idx;
    if (name.size() > 1 && name[0] == 'p' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      idx = std::stoul(name.substr(1));
    } else {
      idx = i;  // positional fallback
    }
    if (idx >= t.atoms.size()) throw MissingAtom(name);
    map[i] = idx;
  }
  return map;
}

TermPtr concretize(const hoa::Label& l, const AtomTable& t,
                   const std::vector<size_t>& apmap) {
  switch (l.kind) {
    case hoa::Label::Kind::True: return tm::truth();
    case hoa::Label::Kind::False: return tm::falsity();
    case hoa::Label::Kind::Ap:
      if (l.ap >= apmap.size())
        throw MissingAtom("p" + std::to_string(l.ap));
      return t.atoms[apmap[l.ap]];
    case hoa::Label::Kind::Not:
      return tm::neg(concretize(l.kids[0], t, apmap));
    case hoa::Label::Kind::And: {
      std::vector<TermPtr> ks;
      for (const auto& k : l.kids) ks.push_back(concretize(k, t, apmap));
      return tm::conj(std::move(ks));
    }
    case hoa::Label::Kind::Or: {
      std::vector<TermPtr> ks;
      for (const auto& k : l.kids) ks.push_back(concretize(k, t, apmap));
      return tm::disj(std::move(ks));
    }
  }
  return tm::truth();
}

}  // namespace

SymbolicGame automaton_to_game(const hoa::Automaton& a, const AtomTable& t,
                               const VarEnv& env) {
  SymbolicGame g;
  g.env = env;
  g.objective = (a.acceptance == hoa::AccKind::Buchi ||
                 a.acceptance == hoa::AccKind::All)
                    ? WinCond::Buechi
                    : WinCond::ParityMaxOdd;

  std::vector<size_t> apmap = ap_index_map(a, t);

  // Locations are reachable (automaton state, entry color) pairs; states
  // whose incoming transitions all carry one color collapse to a single
  // location, so state-colored automata import one location per state.
  std::vector<std::optional<uint64_t>> uniform(a.num_states);
  {
    std::vector<std::set<uint64_t>> incoming(a.num_states);
    for (size_t s = 0; s < a.num_states; ++s)
      for (const auto& e : a.edges[s])
        incoming[e.target].insert(a.game_color(e));
    for (size_t s = 0; s < a.num_states; ++s)
      if (incoming[s].size() == 1) uniform[s] = *incoming[s].begin();
  }

  std::map<std::pair<size_t, uint64_t>, size_t> index;
  std::vector<std::pair<size_t, uint64_t>> work;

  auto intern = [&](size_t state, uint64_t color) {
    if (uniform[state]) color = *uniform[state];
    auto key = std::make_pair(state, color);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    size_t id = g.locations.size();
    index[key] = id;
    std::string name = "q" + std::to_string(state);
    if (!uniform[state]) name += "c" + std::to_string(color);
    g.locations.push_back({name, color, tm::truth()});
    work.push_back(key);
    return id;
  };

  // A non-uniform initial state enters with no color of its own; the
  // initial visit is finite, so the neutral 0 cannot disturb max-odd.
  g.initial = intern(a.initial, 0);

  while (!work.empty()) {
    auto [state, color] = work.back();
    work.pop_back();
    size_t from = index.at({state, color});
    for (const auto& e : a.edges[state]) {
      TermPtr guard = normalize(concretize(e.label, t, apmap));
      if (guard->is_false()) continue;
      size_t to = intern(e.target, a.game_color(e));
      g.transitions.push_back({from, to, guard});
    }
  }

  // Merge adjacent same-parity colors: only parity and relative order matter
  // under max-odd, and every color level deepens the parity recursion.
  if (g.objective == WinCond::ParityMaxOdd) {
    std::set<uint64_t> used;
    for (const auto& l : g.locations) used.insert(l.color);
    std::map<uint64_t, uint64_t> remap;
    uint64_t next = 0;
    bool first = true;
    uint64_t prev_parity = 0;
    for (uint64_t c : used) {
      if (first) {
        next = c % 2;
        prev_parity = c % 2;
        first = false;
      } else if (c % 2 != prev_parity) {
        ++next;
        prev_parity = c % 2;
      }
      remap[c] = next;
    }
    for (auto& l : g.locations) l.color = remap[l.color];
  }
  return g;
}

SymbolicGame formula_block_to_game(const std::vector<RpltlPtr>& assumes,
                                   const std::vector<RpltlPtr>& asserts,
                                   const VarEnv& env,
                                   const LtlTranslatorConfig& cfg) {
  RpltlPtr f = lt::implies(lt::conj(assumes), lt::conj(asserts));
  AtomTable table = collect_atoms(f);
  std::string ltl = abstract_to_ltl(f, table);
  std::string hoa_text = translate_ltl(ltl, cfg);
  hoa::Automaton aut = hoa::parse_hoa(hoa_text);
  if (aut.ap_count > table.atoms.size())
    throw MissingAtom("automaton uses more propositions than abstracted");
  return automaton_to_game(aut, table, env);
}

SymbolicGame build_arena(const Spec& spec, const LtlTranslatorConfig& cfg) {
  std::vector<SymbolicGame> parts;
  for (const auto& f : spec.formulas)
    parts.push_back(formula_block_to_game(f.assumes, f.asserts, spec.env, cfg));
  for (const auto& g : spec.games)
    parts.push_back(from_game_block(spec.env, g));
  if (parts.empty()) return trivial_game(spec.env);
  SymbolicGame arena = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) arena = product(arena, parts[i]);
  return arena;
}

}  // namespace issy::logic
