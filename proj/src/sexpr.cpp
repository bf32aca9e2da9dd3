#include "issy/sexpr.hpp"

#include <sstream>

namespace issy {

std::string SExpr::to_string() const {
  if (is_atom) return atom;
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) os << " ";
    os << items[i].to_string();
  }
  os << ")";
  return os.str();
}

namespace {

struct Reader {
  const std::string& text;
  size_t pos = 0;
  char comment;

  bool at_end() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void skip_ws() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos;
      } else if (comment && c == comment) {
        while (!at_end() && peek() != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  std::optional<SExpr> read(std::string* err) {
    skip_ws();
    if (at_end()) return std::nullopt;
    size_t start = pos;
    char c = peek();
    if (c == '(') {
      ++pos;
      std::vector<SExpr> items;
      for (;;) {
        skip_ws();
        if (at_end()) {
          if (err) *err = "unbalanced parenthesis";
          return std::nullopt;
        }
        if (peek() == ')') {
          ++pos;
          return SExpr::make_list(std::move(items), start);
        }
        auto item = read(err);
        if (!item) return std::nullopt;
        items.push_back(std::move(*item));
      }
    }
    if (c == ')') {
      if (err) *err = "unexpected ')'";
      return std::nullopt;
    }
    // Strings pass through as single atoms including quotes (needed for the
    // SMT-LIB model/HOA headers that embed them).
    if (c == '"') {
      size_t i = pos + 1;
      while (i < text.size() && text[i] != '"') ++i;
      if (i >= text.size()) {
        if (err) *err = "unterminated string";
        return std::nullopt;
      }
      std::string tok = text.substr(pos, i - pos + 1);
      pos = i + 1;
      return SExpr::make_atom(std::move(tok), start);
    }
    size_t i = pos;
    while (i < text.size()) {
      char d = text[i];
      if (d == ' ' || d == '\t' || d == '\n' || d == '\r' || d == '(' ||
          d == ')' || (comment && d == comment))
        break;
      ++i;
    }
    std::string tok = text.substr(pos, i - pos);
    pos = i;
    return SExpr::make_atom(std::move(tok), start);
  }
};

}  // namespace

SExprParseResult parse_sexprs(const std::string& text, char comment_char) {
  Reader r{text, 0, comment_char};
  SExprParseResult out;
  for (;;) {
    std::string err;
    auto e = r.read(&err);
    if (!e) {
      if (!err.empty()) out.error = SExprError{err, r.pos};
      break;
    }
    out.exprs.push_back(std::move(*e));
  }
  if (!out.error) {
    r.skip_ws();
    if (!r.at_end()) out.error = SExprError{"trailing input", r.pos};
  }
  return out;
}

std::optional<SExpr> parse_one_sexpr(const std::string& text, size_t* pos,
                                     std::string* error) {
  Reader r{text, *pos, ';'};
  std::string err;
  auto e = r.read(&err);
  *pos = r.pos;
  if (!e && error) *error = err;
  return e;
}

}  // namespace issy
