#include "issy/diagnostics.hpp"

#include <sstream>

namespace issy {

std::string format_diagnostic(const Diagnostic& d, const std::string& file) {
  std::ostringstream os;
  os << file << ":" << d.span.line << ":" << d.span.col << ": "
     << (d.severity == Diagnostic::Severity::Error ? "error" : "warning")
     << " [" << d.code << "] " << d.message;
  return os.str();
}

}  // namespace issy
