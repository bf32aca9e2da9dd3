// issy-ltl: fallback LTL-to-automaton translator producing deterministic
// complete parity (max odd) automata in HOA v1 for a fragment of LTL:
// safety, co-safety, boolean combinations of GF/FG over propositional
// formulas, and top-level mixes of those. Formulas outside the fragment
// exit nonzero so the caller can fall back to a full translator.

#include <iostream>
#include <string>

#include "issy/ltlgen.hpp"

int main(int argc, char** argv) {
  std::string formula;
  bool have_formula = false;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--version") {
      std::cout << "issy-ltl 0.1\n";
      return 0;
    }
    if (a == "-f" && i + 1 < argc) {
      formula = argv[++i];
      have_formula = true;
      continue;
    }
    if (!a.empty() && a[0] == '-') continue;  // ignore flag compatibility
    formula = a;
    have_formula = true;
  }
  if (!have_formula) {
    std::getline(std::cin, formula);
    have_formula = !formula.empty();
  }
  if (!have_formula) {
    std::cerr << "issy-ltl: no formula given\n";
    return 2;
  }
  try {
    auto f = issy::ltlgen::parse_pltl(formula);
    std::string why;
    auto dpa = issy::ltlgen::translate(f, &why);
    if (!dpa) {
      std::cerr << "issy-ltl: " << why
                << " (install a full LTL translator and set ISSY_LTL_CMD)\n";
      return 3;
    }
    std::cout << issy::ltlgen::to_hoa(*dpa);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "issy-ltl: " << e.what() << "\n";
    return 2;
  }
}
