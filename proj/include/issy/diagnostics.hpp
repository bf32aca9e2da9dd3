#pragma once

#include <string>
#include <vector>

namespace issy {

struct Span {
  int line = 1;    // 1-based
  int col = 1;     // 1-based
  size_t offset = 0;
  size_t length = 0;
};

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  Span span;

  static Diagnostic error(std::string code, std::string msg, Span span = {}) {
    return {Severity::Error, std::move(code), std::move(msg), span};
  }
  static Diagnostic warning(std::string code, std::string msg,
                            Span span = {}) {
    return {Severity::Warning, std::move(code), std::move(msg), span};
  }
};

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds)
    if (d.severity == Diagnostic::Severity::Error) return true;
  return false;
}

std::string format_diagnostic(const Diagnostic& d, const std::string& file);

}  // namespace issy
