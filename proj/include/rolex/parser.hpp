#pragma once

#include "rolex/ast.hpp"
#include "rolex/token.hpp"

namespace rolex {

struct ParseResult {
  Program program;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return !hasErrors(diagnostics); }
};

// Parses a token stream into a Program. Directive/clause combinations not
// licensed by the grammar are reported as GrammarViolation; structural
// errors as SyntaxError with the expected-symbol set.
ParseResult parse(const std::vector<Token>& tokens);

// Convenience: tokenize + parse.
ParseResult parseSource(std::string_view source);

}  // namespace rolex
