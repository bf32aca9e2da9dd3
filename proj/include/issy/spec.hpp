#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "issy/rpltl.hpp"
#include "issy/terms.hpp"

namespace issy {

enum class WinCond { Safety, Reachability, Buechi, CoBuechi, ParityMaxOdd };

const char* to_string(WinCond w);

struct FormulaBlock {
  std::vector<RpltlPtr> assumes;
  std::vector<RpltlPtr> asserts;
};

struct GameLocation {
  std::string name;
  uint64_t color = 1;
  TermPtr domain;  // over state variables only
};

struct GameTransition {
  std::string from;
  std::string to;
  TermPtr guard;  // over inputs, states, primed states
};

struct GameBlock {
  WinCond wincond = WinCond::Safety;
  std::string initial;
  std::vector<GameLocation> locations;
  std::vector<GameTransition> transitions;
};

// Elaborated specification: typed, macro-free.
struct Spec {
  VarEnv env;
  std::vector<FormulaBlock> formulas;
  std::vector<GameBlock> games;
};

}  // namespace issy
