#include "rolex/lexer.hpp"

#include <array>
#include <cctype>
#include <cstdlib>
#include <unordered_set>

namespace rolex {

std::string formatDiagnostic(const std::string& file, const Diagnostic& d) {
  std::string sev = d.severity == Severity::Error ? "error" : "warning";
  return file + ":" + std::to_string(d.pos.line) + ":" + std::to_string(d.pos.col) +
         ": " + sev + ": " + d.message;
}

bool isBaseKeyword(const std::string& w) {
  static const std::unordered_set<std::string> kws = {
      "int", "unsigned", "float", "double", "void",
      "if", "else", "while", "for", "return", "break", "continue",
      "print", "sizeof", "NULL",
      "tolerant", "robust", "heal", "rolex",
      "PRECISION", "MAXIMUS", "DETECT", "CORRECT",
  };
  return kws.count(w) != 0;
}

bool isPragmaKeyword(const std::string& w) {
  static const std::unordered_set<std::string> kws = {
      "rolex", "robust", "declare", "resilient", "retry", "ignore",
      "detect", "correct", "DETECT", "CORRECT",
      "fallback", "share", "private", "compare", "reinitialize", "ameliorate",
      "default", "shared", "none",
      "recover-rollback", "recover-rollforward",
  };
  return kws.count(w) != 0;
}

namespace {

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  LexResult run() {
    LexResult out;
    while (true) {
      skipSpaceAndComments(out);
      if (!out.diagnostics.empty()) break;
      if (inPragma_ && (eof() || peek() == '\n')) {
        out.tokens.push_back(make(TokenKind::PragmaEnd, "\\n"));
        inPragma_ = false;
        if (!eof()) advance();
        continue;
      }
      if (eof()) break;
      SourcePos pos = here();
      char c = peek();
      if (c == '#') {
        if (!lexPragmaIntro(out)) break;
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        lexWord(out, pos);
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        if (!lexNumber(out, pos)) break;
        continue;
      }
      if (c == '"') {
        if (!lexString(out, pos)) break;
        continue;
      }
      if (!lexPunct(out, pos)) break;
    }
    if (out.diagnostics.empty())
      out.tokens.push_back(make(TokenKind::EndOfFile, ""));
    return out;
  }

 private:
  bool eof() const { return i_ >= src_.size(); }
  char peek(size_t k = 0) const { return i_ + k < src_.size() ? src_[i_ + k] : '\0'; }
  SourcePos here() const { return {line_, col_}; }

  void advance() {
    if (eof()) return;
    if (src_[i_] == '\n') {
      line_++;
      col_ = 1;
    } else {
      col_++;
    }
    i_++;
  }

  Token make(TokenKind k, std::string lexeme) {
    Token t;
    t.kind = k;
    t.lexeme = std::move(lexeme);
    t.pos = here();
    return t;
  }

  void error(LexResult& out, SourcePos pos, std::string msg) {
    Diagnostic d;
    d.kind = DiagKind::Lexical;
    d.pos = pos;
    d.message = std::move(msg);
    out.diagnostics.push_back(std::move(d));
  }

  void skipSpaceAndComments(LexResult& out) {
    while (!eof()) {
      char c = peek();
      if (c == '\n' && inPragma_) return;  // pragma terminator is a token
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        while (!eof() && peek() != '\n') advance();
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        SourcePos pos = here();
        advance();
        advance();
        while (!eof() && !(peek() == '*' && peek(1) == '/')) advance();
        if (eof()) {
          error(out, pos, "unterminated block comment");
          return;
        }
        advance();
        advance();
        continue;
      }
      return;
    }
  }

  bool lexPragmaIntro(LexResult& out) {
    SourcePos pos = here();
    advance();  // '#'
    std::string w1 = readWordRaw(false);
    while (!eof() && (peek() == ' ' || peek() == '\t')) advance();
    std::string w2 = readWordRaw(false);
    if (w1 != "pragma" || w2 != "rolex") {
      error(out, pos, "expected '#pragma rolex'");
      return false;
    }
    Token t = make(TokenKind::PragmaIntro, "#pragma rolex");
    t.pos = pos;
    out.tokens.push_back(std::move(t));
    inPragma_ = true;
    return true;
  }

  std::string readWordRaw(bool allowHyphen) {
    std::string w;
    while (!eof()) {
      char c = peek();
      bool wordChar = std::isalnum(static_cast<unsigned char>(c)) || c == '_';
      // hyphenated directive names (recover-rollback) only: a hyphen must be
      // followed by a letter, so expressions like "a-b" never reach here.
      if (!wordChar && allowHyphen && c == '-' &&
          std::isalpha(static_cast<unsigned char>(peek(1))))
        wordChar = true;
      if (!wordChar) break;
      w.push_back(c);
      advance();
    }
    return w;
  }

  void lexWord(LexResult& out, SourcePos pos) {
    std::string w = readWordRaw(inPragma_);
    Token t;
    if (inPragma_)
      t.kind = isPragmaKeyword(w) ? TokenKind::Keyword : TokenKind::Identifier;
    else
      t.kind = isBaseKeyword(w) ? TokenKind::Keyword : TokenKind::Identifier;
    t.lexeme = std::move(w);
    t.pos = pos;
    out.tokens.push_back(std::move(t));
  }

  bool lexNumber(LexResult& out, SourcePos pos) {
    std::string text;
    bool isFloat = false;
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      text += peek();
      advance();
      text += peek();
      advance();
      if (!std::isxdigit(static_cast<unsigned char>(peek()))) {
        error(out, pos, "malformed hexadecimal literal");
        return false;
      }
      while (std::isxdigit(static_cast<unsigned char>(peek()))) {
        text += peek();
        advance();
      }
    } else {
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        text += peek();
        advance();
      }
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        isFloat = true;
        text += peek();
        advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
          text += peek();
          advance();
        }
      }
      if (peek() == 'e' || peek() == 'E') {
        size_t k = 1;
        if (peek(1) == '+' || peek(1) == '-') k = 2;
        if (std::isdigit(static_cast<unsigned char>(peek(k)))) {
          isFloat = true;
          for (size_t j = 0; j < k; j++) {
            text += peek();
            advance();
          }
          while (std::isdigit(static_cast<unsigned char>(peek()))) {
            text += peek();
            advance();
          }
        }
      }
    }
    Token t;
    t.pos = pos;
    t.lexeme = text;
    if (isFloat) {
      t.kind = TokenKind::FloatLit;
      t.floatValue = std::strtod(text.c_str(), nullptr);
    } else {
      t.kind = TokenKind::IntLit;
      t.intValue = std::strtoull(text.c_str(), nullptr, 0);
    }
    out.tokens.push_back(std::move(t));
    return true;
  }

  bool lexString(LexResult& out, SourcePos pos) {
    advance();  // opening quote
    std::string value;
    while (true) {
      if (eof() || peek() == '\n') {
        error(out, pos, "unterminated string literal");
        return false;
      }
      char c = peek();
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        char e = peek();
        switch (e) {
          case 'n': value.push_back('\n'); break;
          case 't': value.push_back('\t'); break;
          case '"': value.push_back('"'); break;
          case '\\': value.push_back('\\'); break;
          default:
            error(out, here(), std::string("unknown escape '\\") + e + "'");
            return false;
        }
        advance();
        continue;
      }
      value.push_back(c);
      advance();
    }
    Token t;
    t.kind = TokenKind::StringLit;
    t.pos = pos;
    t.stringValue = std::move(value);
    t.lexeme = "\"" + t.stringValue + "\"";
    out.tokens.push_back(std::move(t));
    return true;
  }

  bool lexPunct(LexResult& out, SourcePos pos) {
    static const std::array<const char*, 9> two = {"==", "!=", "<=", ">=", "&&",
                                                   "||", "+=", "-=", "*="};
    char c = peek();
    char n = peek(1);
    std::string op(1, c);
    op.push_back(n);
    for (const char* t : two) {
      if (op == t) {
        advance();
        advance();
        Token tok = make(TokenKind::Punct, t);
        tok.pos = pos;
        out.tokens.push_back(std::move(tok));
        return true;
      }
    }
    static const std::string singles = "()[]{};,=<>+-*/%!&";
    if (singles.find(c) == std::string::npos) {
      error(out, pos, std::string("invalid character '") + c + "'");
      return false;
    }
    advance();
    Token tok = make(TokenKind::Punct, std::string(1, c));
    tok.pos = pos;
    out.tokens.push_back(std::move(tok));
    return true;
  }

  std::string_view src_;
  size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
  bool inPragma_ = false;
};

}  // namespace

LexResult tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace rolex
