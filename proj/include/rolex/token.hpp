#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rolex/diag.hpp"

namespace rolex {

enum class TokenKind {
  Keyword,
  Identifier,
  IntLit,
  FloatLit,
  StringLit,
  Punct,
  PragmaIntro,  // "#pragma rolex"
  PragmaEnd,    // the terminating new-line of a pragma
  EndOfFile,
};

struct Token {
  TokenKind kind = TokenKind::EndOfFile;
  std::string lexeme;
  SourcePos pos;
  uint64_t intValue = 0;     // IntLit
  double floatValue = 0.0;   // FloatLit
  std::string stringValue;   // StringLit, unescaped

  bool is(TokenKind k) const { return kind == k; }
  bool isKw(const char* s) const { return kind == TokenKind::Keyword && lexeme == s; }
  bool isPunct(const char* s) const { return kind == TokenKind::Punct && lexeme == s; }
};

// Keywords recognized outside pragma lines. Directive clause words
// (share, private, ...) stay ordinary identifiers there.
bool isBaseKeyword(const std::string& word);
// Keywords recognized between "#pragma rolex" and the ending new-line.
bool isPragmaKeyword(const std::string& word);

}  // namespace rolex
