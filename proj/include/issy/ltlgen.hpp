#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace issy::ltlgen {

// Propositional LTL over atoms p0..pN.
struct PForm;
using PFormPtr = std::shared_ptr<const PForm>;

struct PForm {
  enum class Op {
    True,
    False,
    Ap,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Next,
    Eventually,
    Globally,
    Until,
    WeakUntil,
    Release,
  };
  Op op = Op::True;
  size_t ap = 0;
  std::vector<PFormPtr> kids;
};

struct PltlParseError : std::runtime_error {
  explicit PltlParseError(const std::string& m)
      : std::runtime_error("ltl parse: " + m) {}
};

PFormPtr parse_pltl(const std::string& text);

// Deterministic complete parity (max odd) automaton with transition colors.
struct Dpa {
  size_t num_states = 0;
  size_t initial = 0;
  size_t ap_count = 0;
  size_t num_colors = 1;  // colors are 0..num_colors-1
  struct Edge {
    uint32_t minterm = 0;  // one edge per AP valuation
    size_t target = 0;
    size_t color = 0;
  };
  std::vector<std::vector<Edge>> edges;
};

// Covered fragment: constants; syntactic safety; syntactic co-safety;
// boolean combinations of GF/FG over propositional arguments; a conjunction
// of safety with such a combination; a disjunction of co-safety with one.
// Returns nullopt outside the fragment or past the size caps.
std::optional<Dpa> translate(const PFormPtr& f, std::string* why = nullptr);

std::string to_hoa(const Dpa& d);

// Trace-side oracle: truth of f on the ultimately periodic word
// stem . loop^omega (valuations as AP bitmasks).
bool eval_lasso(const PFormPtr& f, const std::vector<uint32_t>& stem,
                const std::vector<uint32_t>& loop);

// Run the automaton on the same word; max-odd acceptance of the lasso.
bool dpa_accepts(const Dpa& d, const std::vector<uint32_t>& stem,
                 const std::vector<uint32_t>& loop);

}  // namespace issy::ltlgen
