#pragma once

#include <string_view>

#include "rolex/token.hpp"

namespace rolex {

struct LexResult {
  std::vector<Token> tokens;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return !hasErrors(diagnostics); }
};

// Tokenizes an .rc source. On a lexical error the offending position is
// reported and lexing stops. "#pragma rolex" opens a pragma context that a
// new-line closes; directive keywords are only live inside that context.
LexResult tokenize(std::string_view source);

}  // namespace rolex
