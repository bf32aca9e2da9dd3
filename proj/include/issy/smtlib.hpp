#pragma once

#include <functional>
#include <optional>
#include <string>

#include "issy/sexpr.hpp"
#include "issy/terms.hpp"

namespace issy::smtlib {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& m)
      : std::runtime_error("smtlib: " + m) {}
};

std::optional<Sort> parse_sort(const SExpr& e);

// SMT-LIB term over flat (unprimed) variable names. `let` bindings are
// expanded; forall/exists map onto quantified terms. `lookup` reports the
// sort of a declared symbol (nullopt -> undeclared, which is an error).
TermPtr parse_term(const SExpr& e,
                   const std::function<std::optional<Sort>(const std::string&)>&
                       lookup);

}  // namespace issy::smtlib
