#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace issy {

// Minimal s-expression value: atom or list. Atoms are raw token text,
// parsed greedily until whitespace, '(', ')', or end of input.
struct SExpr {
  bool is_atom = false;
  std::string atom;
  std::vector<SExpr> items;
  size_t offset = 0;  // byte offset of the first token character

  static SExpr make_atom(std::string a, size_t off = 0) {
    SExpr e;
    e.is_atom = true;
    e.atom = std::move(a);
    e.offset = off;
    return e;
  }
  static SExpr make_list(std::vector<SExpr> xs, size_t off = 0) {
    SExpr e;
    e.items = std::move(xs);
    e.offset = off;
    return e;
  }

  bool is_list() const { return !is_atom; }
  size_t size() const { return items.size(); }
  const SExpr& operator[](size_t i) const { return items[i]; }
  bool head_is(const std::string& s) const {
    return is_list() && !items.empty() && items[0].is_atom &&
           items[0].atom == s;
  }
  std::string to_string() const;
};

struct SExprError {
  std::string message;
  size_t offset;
};

// Reads all top-level s-expressions. Comments run from `comment_char` to end
// of line (use '\0' to disable).
struct SExprParseResult {
  std::vector<SExpr> exprs;
  std::optional<SExprError> error;
};

SExprParseResult parse_sexprs(const std::string& text, char comment_char = ';');

// Reads exactly one s-expression starting at *pos; advances *pos past it.
// Useful for incremental protocol streams.
std::optional<SExpr> parse_one_sexpr(const std::string& text, size_t* pos,
                                     std::string* error = nullptr);

}  // namespace issy
