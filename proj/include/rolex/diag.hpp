#pragma once

#include <string>
#include <vector>

namespace rolex {

struct SourcePos {
  int line = 0;
  int col = 0;
};

enum class DiagKind {
  Lexical,
  Syntax,
  GrammarViolation,
  Semantic,
  Transform,
};

enum class Severity { Error, Warning };

struct Diagnostic {
  DiagKind kind = DiagKind::Semantic;
  Severity severity = Severity::Error;
  SourcePos pos;
  std::string message;
  // for syntax errors: the symbols the parser would have accepted
  std::vector<std::string> expected;
};

// "file:line:col: severity: message"
std::string formatDiagnostic(const std::string& file, const Diagnostic& d);

inline bool hasErrors(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds)
    if (d.severity == Severity::Error) return true;
  return false;
}

}  // namespace rolex
