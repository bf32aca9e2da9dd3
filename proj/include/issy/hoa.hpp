#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace issy::hoa {

struct HoaError : std::runtime_error {
  explicit HoaError(const std::string& m) : std::runtime_error("hoa: " + m) {}
};
struct UnsupportedAcceptance : HoaError {
  explicit UnsupportedAcceptance(const std::string& m)
      : HoaError("unsupported acceptance: " + m) {}
};
struct NondeterministicAutomaton : HoaError {
  explicit NondeterministicAutomaton(const std::string& m)
      : HoaError("automaton not deterministic/complete: " + m) {}
};

// Propositional formula over AP indices, for edge labels.
struct Label {
  enum class Kind { True, False, Ap, Not, And, Or };
  Kind kind = Kind::True;
  size_t ap = 0;
  std::vector<Label> kids;

  static Label t() { return {}; }
  static Label f() {
    Label l;
    l.kind = Kind::False;
    return l;
  }
};

bool eval_label(const Label& l, uint32_t valuation);

enum class AccKind { Buchi, ParityMaxOdd, ParityMaxEven, All };

// Deterministic complete omega-automaton with transition colors. Colors are
// raw HOA colors; the max-odd mapping (D15) happens in automaton_to_game.
struct Automaton {
  size_t num_states = 0;
  size_t initial = 0;
  size_t ap_count = 0;
  std::vector<std::string> ap_names;  // AP index -> name (quotes stripped)
  AccKind acceptance = AccKind::Buchi;
  size_t acc_sets = 0;

  struct Edge {
    Label label;
    size_t target = 0;
    std::vector<size_t> colors;  // acceptance sets on this transition
  };
  std::vector<std::vector<Edge>> edges;  // per source state

  // Game color under the ParityMaxOdd convention (D15).
  uint64_t game_color(const Edge& e) const;
};

// Parses HOA v1 with Buchi / parity max / all acceptance; state-based
// acceptance is pushed onto outgoing transitions. Throws HoaError and
// friends.
Automaton parse_hoa(const std::string& text);

// Verifies label determinism and completeness propositionally (every
// valuation enables exactly one edge per state).
void check_deterministic_complete(const Automaton& a);

}  // namespace issy::hoa
