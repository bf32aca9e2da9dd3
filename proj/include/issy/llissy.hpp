#pragma once

#include <optional>
#include <string>
#include <vector>

#include "issy/diagnostics.hpp"
#include "issy/spec.hpp"

namespace issy::llissy {

// Canonical text: the three top-level lists sit on one bracket line each,
// every element on its own line indented two spaces, inner lists single-line
// with single-space separation, exactly one trailing newline. An empty spec
// is "(() () ())\n".
std::string emit_llissy(const Spec& spec);

struct ParseResult {
  std::optional<Spec> spec;
  std::vector<Diagnostic> diagnostics;
};

// Accepts any whitespace variant and ';' comments; validates arities,
// typing, location references, and the at-most-one-non-safety rule.
ParseResult parse_llissy(const std::string& text);

}  // namespace issy::llissy
