#include "rolex/parser.hpp"

#include "rolex/lexer.hpp"

namespace rolex {

namespace {

struct ParseAbort {};

class Parser {
 public:
  explicit Parser(const std::vector<Token>& toks) : toks_(toks) {}

  ParseResult run() {
    ParseResult out;
    try {
      while (!at(TokenKind::EndOfFile)) parseTopLevel(out.program);
    } catch (const ParseAbort&) {
      // diagnostic already recorded
    }
    out.diagnostics = std::move(diags_);
    return out;
  }

 private:
  const Token& cur(size_t k = 0) const {
    size_t i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  bool at(TokenKind k) const { return cur().kind == k; }
  bool atKw(const char* s) const { return cur().isKw(s); }
  bool atPunct(const char* s) const { return cur().isPunct(s); }
  const Token& take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail(DiagKind kind, SourcePos pos, std::string msg,
                         std::vector<std::string> expected = {}) {
    Diagnostic d;
    d.kind = kind;
    d.pos = pos;
    d.message = std::move(msg);
    d.expected = std::move(expected);
    diags_.push_back(std::move(d));
    throw ParseAbort{};
  }

  const Token& expectPunct(const char* s) {
    if (!atPunct(s))
      fail(DiagKind::Syntax, cur().pos, "expected '" + std::string(s) + "', found '" + cur().lexeme + "'", {s});
    return take();
  }
  const Token& expectKw(const char* s) {
    if (!atKw(s))
      fail(DiagKind::Syntax, cur().pos, "expected '" + std::string(s) + "', found '" + cur().lexeme + "'", {s});
    return take();
  }
  std::string expectIdent() {
    if (!at(TokenKind::Identifier))
      fail(DiagKind::Syntax, cur().pos, "expected identifier, found '" + cur().lexeme + "'", {"identifier"});
    return take().lexeme;
  }
  uint64_t expectIntLit() {
    if (!at(TokenKind::IntLit))
      fail(DiagKind::Syntax, cur().pos, "expected integer literal, found '" + cur().lexeme + "'", {"integer"});
    return take().intValue;
  }

  // ----- types and qualifiers -----

  bool atTypeStart() const {
    return atKw("int") || atKw("unsigned") || atKw("float") || atKw("double") || atKw("void");
  }
  bool atQualifierStart() const {
    return atKw("tolerant") || atKw("robust") || atKw("heal");
  }

  Scalar parseScalar() {
    if (atKw("int")) { take(); return Scalar::I32; }
    if (atKw("unsigned")) {
      take();
      expectKw("int");
      return Scalar::U32;
    }
    if (atKw("float")) { take(); return Scalar::F32; }
    if (atKw("double")) { take(); return Scalar::F64; }
    if (atKw("void")) { take(); return Scalar::Void; }
    fail(DiagKind::Syntax, cur().pos, "expected type, found '" + cur().lexeme + "'",
         {"int", "unsigned int", "float", "double", "void"});
  }

  Type parseTypePrefix() {
    Type t;
    t.scalar = parseScalar();
    while (atPunct("*")) {
      take();
      t.pointerDepth++;
    }
    if (t.pointerDepth > 1)
      fail(DiagKind::Syntax, cur().pos, "multi-level pointers are not supported");
    return t;
  }

  Qualifier parseQualifier() {
    Qualifier q;
    if (atKw("tolerant")) {
      SourcePos p = take().pos;
      q.kind = Qualifier::Kind::Tolerant;
      if (atPunct("(")) {
        take();
        ToleranceLimit lim;
        if (atKw("PRECISION")) lim.kind = ToleranceLimit::Kind::Precision;
        else if (atKw("MAXIMUS")) lim.kind = ToleranceLimit::Kind::Maximus;
        else
          fail(DiagKind::Syntax, cur().pos, "expected PRECISION or MAXIMUS", {"PRECISION", "MAXIMUS"});
        take();
        expectPunct("=");
        SourcePos vp = cur().pos;
        lim.value = expectIntLit();
        if (lim.value == 0)
          fail(DiagKind::GrammarViolation, vp, "tolerance limit must be strictly positive");
        expectPunct(")");
        q.limit = lim;
      }
      (void)p;
      return q;
    }
    if (atKw("robust")) {
      take();
      q.kind = Qualifier::Kind::Robust;
      expectPunct("(");
      if (atKw("DETECT")) q.strength = Strength::Detect;
      else if (atKw("CORRECT")) q.strength = Strength::Correct;
      else
        fail(DiagKind::Syntax, cur().pos, "expected DETECT or CORRECT", {"DETECT", "CORRECT"});
      take();
      expectPunct(")");
      return q;
    }
    // heal ( recovery_func ( ) )
    expectKw("heal");
    q.kind = Qualifier::Kind::Heal;
    expectPunct("(");
    q.healFunction = expectIdent();
    expectPunct("(");
    expectPunct(")");
    expectPunct(")");
    return q;
  }

  // ----- top level -----

  void parseTopLevel(Program& prog) {
    if (at(TokenKind::PragmaIntro)) {
      // only declare directives are legal at file scope
      size_t save = pos_;
      take();
      if (!atKw("declare"))
        fail(DiagKind::Syntax, cur().pos, "only 'declare' directives may appear at file scope");
      pos_ = save;
      auto dir = parseDirectiveLine();
      FunctionDecl fn = parseFunction(parseTypePrefix());
      fn.declareDirective = std::move(dir);
      prog.functions.push_back(std::move(fn));
      prog.order.emplace_back(true, static_cast<int>(prog.functions.size() - 1));
      return;
    }
    Qualifier q;
    if (atQualifierStart()) q = parseQualifier();
    Type t = parseTypePrefix();
    std::string name = expectIdent();
    if (atPunct("(")) {
      if (q.isRolex())
        fail(DiagKind::GrammarViolation, cur().pos, "resilience qualifiers do not apply to functions");
      FunctionDecl fn = parseFunctionRest(t, name);
      prog.functions.push_back(std::move(fn));
      prog.order.emplace_back(true, static_cast<int>(prog.functions.size() - 1));
      return;
    }
    VarDecl d = parseDeclRest(q, t, name);
    expectPunct(";");
    prog.globals.push_back(std::move(d));
    prog.order.emplace_back(false, static_cast<int>(prog.globals.size() - 1));
  }

  VarDecl parseDeclRest(Qualifier q, Type t, std::string name) {
    VarDecl d;
    d.qualifier = std::move(q);
    d.pos = cur().pos;
    d.name = std::move(name);
    while (atPunct("[")) {
      take();
      SourcePos p = cur().pos;
      uint64_t dim = expectIntLit();
      if (dim == 0) fail(DiagKind::Syntax, p, "array dimension must be positive");
      t.arrayDims.push_back(static_cast<int64_t>(dim));
      expectPunct("]");
    }
    if (t.arrayDims.size() > 2)
      fail(DiagKind::Syntax, d.pos, "arrays are limited to two dimensions");
    if (t.isArray() && t.pointerDepth > 0 && t.arrayDims.size() > 1)
      fail(DiagKind::Syntax, d.pos, "2-D arrays of pointers are not supported");
    d.type = std::move(t);
    if (atPunct("=")) {
      take();
      d.init = parseExpr();
    }
    return d;
  }

  FunctionDecl parseFunction(Type returnType) {
    std::string name = expectIdent();
    return parseFunctionRest(std::move(returnType), std::move(name));
  }

  FunctionDecl parseFunctionRest(Type returnType, std::string name) {
    FunctionDecl fn;
    fn.pos = cur().pos;
    fn.returnType = std::move(returnType);
    fn.name = std::move(name);
    expectPunct("(");
    if (!atPunct(")")) {
      while (true) {
        VarDecl p;
        p.pos = cur().pos;
        p.type = parseTypePrefix();
        p.name = expectIdent();
        if (p.type.isVoid())
          fail(DiagKind::Syntax, p.pos, "parameters cannot have void type");
        fn.params.push_back(std::move(p));
        if (atPunct(",")) { take(); continue; }
        break;
      }
    }
    expectPunct(")");
    if (atPunct(";")) {
      take();
      return fn;
    }
    fn.body = parseBlock();
    return fn;
  }

  // ----- directives -----

  std::unique_ptr<Directive> parseDirectiveLine() {
    SourcePos pos = take().pos;  // PragmaIntro
    auto dir = std::make_unique<Directive>();
    dir->pos = pos;
    if (atKw("recover-rollback") || atKw("recover-rollforward")) {
      dir->kind = take().lexeme == "recover-rollback" ? Directive::Kind::RecoverRollback
                                                      : Directive::Kind::RecoverRollforward;
      parseClauses(*dir);
    } else if (atKw("robust")) {
      take();
      dir->kind = Directive::Kind::Robust;
      if (atKw("detect") || atKw("DETECT")) { take(); dir->strength = Strength::Detect; }
      else if (atKw("correct") || atKw("CORRECT")) { take(); dir->strength = Strength::Correct; }
      else
        fail(DiagKind::GrammarViolation, cur().pos,
             "robust directive requires exactly one strength clause (detect or correct)");
      parseClauses(*dir);
    } else if (atKw("declare")) {
      take();
      dir->kind = Directive::Kind::DeclareResilient;
      expectKw("resilient");
      if (atKw("retry")) { take(); dir->declareMode = Directive::DeclareMode::Retry; }
      else if (atKw("ignore")) { take(); dir->declareMode = Directive::DeclareMode::Ignore; }
      else if (atKw("robust")) {
        take();
        dir->declareMode = Directive::DeclareMode::Robust;
        expectPunct("(");
        if (atKw("detect") || atKw("DETECT")) { take(); dir->strength = Strength::Detect; }
        else if (atKw("correct") || atKw("CORRECT")) { take(); dir->strength = Strength::Correct; }
        else
          fail(DiagKind::Syntax, cur().pos, "expected detect or correct", {"detect", "correct"});
        expectPunct(")");
      } else {
        fail(DiagKind::Syntax, cur().pos, "expected retry, ignore or robust(...)",
             {"retry", "ignore", "robust"});
      }
      parseClauses(*dir);
    } else {
      fail(DiagKind::Syntax, cur().pos,
           "expected a rolex directive, found '" + cur().lexeme + "'",
           {"recover-rollback", "recover-rollforward", "robust", "declare"});
    }
    if (!at(TokenKind::PragmaEnd))
      fail(DiagKind::Syntax, cur().pos, "unexpected '" + cur().lexeme + "' in directive");
    take();
    checkClauseLegality(*dir);
    return dir;
  }

  void parseClauses(Directive& dir) {
    while (!at(TokenKind::PragmaEnd) && !at(TokenKind::EndOfFile)) {
      if (atPunct(",")) { take(); continue; }
      Clause c;
      c.pos = cur().pos;
      if (atKw("share")) { take(); c.kind = Clause::Kind::Share; parseVarList(c); }
      else if (atKw("private")) { take(); c.kind = Clause::Kind::Private; parseVarList(c); }
      else if (atKw("compare")) { take(); c.kind = Clause::Kind::Compare; parseVarList(c); }
      else if (atKw("reinitialize")) { take(); c.kind = Clause::Kind::Reinitialize; parseVarList(c); }
      else if (atKw("ameliorate")) {
        take();
        c.kind = Clause::Kind::Ameliorate;
        expectPunct("(");
        c.function = expectIdent();
        expectPunct("(");
        expectPunct(")");
        expectPunct(")");
      } else if (atKw("fallback")) {
        take();
        c.kind = Clause::Kind::Fallback;
        expectPunct("(");
        if (!atPunct(")")) c.fallbackValue = parseFallbackValue();
        expectPunct(")");
      } else if (atKw("default")) {
        take();
        c.kind = Clause::Kind::Default;
        expectPunct("(");
        if (atKw("shared")) { take(); c.defaultShared = true; }
        else if (atKw("none")) { take(); c.defaultShared = false; }
        else
          fail(DiagKind::Syntax, cur().pos, "expected shared or none", {"shared", "none"});
        expectPunct(")");
      } else {
        fail(DiagKind::Syntax, cur().pos, "expected a clause, found '" + cur().lexeme + "'",
             {"share", "private", "compare", "reinitialize", "ameliorate", "fallback", "default"});
      }
      dir.clauses.push_back(std::move(c));
    }
  }

  void parseVarList(Clause& c) {
    expectPunct("(");
    while (true) {
      c.vars.push_back(expectIdent());
      if (atPunct(",")) { take(); continue; }
      break;
    }
    expectPunct(")");
  }

  ExprPtr parseFallbackValue() {
    auto e = std::make_unique<Expr>();
    e->pos = cur().pos;
    bool neg = false;
    if (atPunct("-")) { take(); neg = true; }
    if (at(TokenKind::IntLit)) {
      e->kind = Expr::Kind::IntLit;
      e->intValue = take().intValue;
      if (neg) e->intValue = static_cast<uint64_t>(-static_cast<int64_t>(e->intValue));
      return e;
    }
    if (at(TokenKind::FloatLit)) {
      e->kind = Expr::Kind::FloatLit;
      e->floatValue = take().floatValue;
      if (neg) e->floatValue = -e->floatValue;
      return e;
    }
    if (neg)
      fail(DiagKind::Syntax, cur().pos, "expected numeric fallback value");
    if (at(TokenKind::Identifier)) {
      e->kind = Expr::Kind::Ident;
      e->text = take().lexeme;
      return e;
    }
    fail(DiagKind::Syntax, cur().pos, "expected fallback constant or identifier");
  }

  void checkClauseLegality(Directive& dir) {
    bool sawDefault = false, sawAmeliorate = false, sawFallback = false;
    std::vector<std::pair<std::string, SourcePos>> listed;
    for (const auto& c : dir.clauses) {
      bool legal = false;
      switch (dir.kind) {
        case Directive::Kind::RecoverRollback:
        case Directive::Kind::RecoverRollforward:
          legal = c.kind == Clause::Kind::Default || c.kind == Clause::Kind::Private ||
                  c.kind == Clause::Kind::Share || c.kind == Clause::Kind::Reinitialize ||
                  c.kind == Clause::Kind::Ameliorate;
          break;
        case Directive::Kind::Robust:
          legal = c.kind == Clause::Kind::Default || c.kind == Clause::Kind::Private ||
                  c.kind == Clause::Kind::Share || c.kind == Clause::Kind::Compare;
          break;
        case Directive::Kind::DeclareResilient:
          legal = c.kind == Clause::Kind::Fallback;
          break;
      }
      if (!legal)
        fail(DiagKind::GrammarViolation, c.pos,
             "clause '" + clauseName(c.kind) + "' is not permitted on this directive");
      if (c.kind == Clause::Kind::Default) {
        if (sawDefault)
          fail(DiagKind::GrammarViolation, c.pos, "at most one default clause per directive");
        sawDefault = true;
      }
      if (c.kind == Clause::Kind::Ameliorate) {
        if (sawAmeliorate)
          fail(DiagKind::GrammarViolation, c.pos, "at most one ameliorate clause per directive");
        sawAmeliorate = true;
      }
      if (c.kind == Clause::Kind::Fallback) {
        if (sawFallback)
          fail(DiagKind::GrammarViolation, c.pos, "at most one fallback clause per directive");
        sawFallback = true;
      }
      if (c.kind == Clause::Kind::Share || c.kind == Clause::Kind::Private ||
          c.kind == Clause::Kind::Compare || c.kind == Clause::Kind::Reinitialize) {
        for (const auto& v : c.vars) {
          for (const auto& seen : listed)
            if (seen.first == v)
              fail(DiagKind::GrammarViolation, c.pos,
                   "variable '" + v + "' appears in more than one data clause");
          listed.emplace_back(v, c.pos);
        }
      }
    }
  }

  static std::string clauseName(Clause::Kind k) {
    switch (k) {
      case Clause::Kind::Share: return "share";
      case Clause::Kind::Private: return "private";
      case Clause::Kind::Compare: return "compare";
      case Clause::Kind::Reinitialize: return "reinitialize";
      case Clause::Kind::Ameliorate: return "ameliorate";
      case Clause::Kind::Fallback: return "fallback";
      case Clause::Kind::Default: return "default";
    }
    return "?";
  }

  // ----- statements -----

  StmtPtr parseBlock() {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::Block;
    s->pos = expectPunct("{").pos;
    while (!atPunct("}")) {
      if (at(TokenKind::EndOfFile))
        fail(DiagKind::Syntax, cur().pos, "unexpected end of file inside block", {"}"});
      s->stmts.push_back(parseStmt());
    }
    take();
    return s;
  }

  StmtPtr parseStmt() {
    if (at(TokenKind::PragmaIntro)) {
      auto dir = parseDirectiveLine();
      if (dir->kind == Directive::Kind::DeclareResilient)
        fail(DiagKind::Syntax, dir->pos, "declare directives bind to file-scope functions");
      auto s = std::make_unique<Stmt>();
      s->kind = Stmt::Kind::Directive;
      s->pos = dir->pos;
      s->body = parseStructuredBlock();
      s->directive = std::move(dir);
      return s;
    }
    if (atPunct("{")) return parseBlock();
    SourcePos pos = cur().pos;
    if (atQualifierStart() || atTypeStart()) {
      Qualifier q;
      if (atQualifierStart()) q = parseQualifier();
      Type t = parseTypePrefix();
      std::string name = expectIdent();
      auto s = std::make_unique<Stmt>();
      s->kind = Stmt::Kind::Decl;
      s->pos = pos;
      s->decl = parseDeclRest(std::move(q), std::move(t), std::move(name));
      s->decl.pos = pos;
      expectPunct(";");
      return s;
    }
    if (atKw("if")) return parseIf();
    if (atKw("while")) return parseWhile();
    if (atKw("for")) return parseFor();
    if (atKw("return")) {
      auto s = std::make_unique<Stmt>();
      s->kind = Stmt::Kind::Return;
      s->pos = take().pos;
      if (!atPunct(";")) s->expr = parseExpr();
      expectPunct(";");
      return s;
    }
    if (atKw("break") || atKw("continue")) {
      auto s = std::make_unique<Stmt>();
      s->kind = cur().lexeme == "break" ? Stmt::Kind::Break : Stmt::Kind::Continue;
      s->pos = take().pos;
      expectPunct(";");
      return s;
    }
    if (atKw("print")) {
      auto s = std::make_unique<Stmt>();
      s->kind = Stmt::Kind::Print;
      s->pos = take().pos;
      expectPunct("(");
      if (!atPunct(")")) {
        while (true) {
          s->args.push_back(parseExpr());
          if (atPunct(",")) { take(); continue; }
          break;
        }
      }
      expectPunct(")");
      expectPunct(";");
      return s;
    }
    if (atPunct(";")) {
      take();
      auto s = std::make_unique<Stmt>();
      s->kind = Stmt::Kind::Block;
      s->pos = pos;
      return s;
    }
    return parseAssignOrCall();
  }

  StmtPtr parseStructuredBlock() {
    // A structured block is a compound statement or a single iteration /
    // selection statement: one entry, one exit.
    if (atPunct("{")) return parseBlock();
    if (atKw("if")) return parseIf();
    if (atKw("while")) return parseWhile();
    if (atKw("for")) return parseFor();
    fail(DiagKind::Syntax, cur().pos, "directive requires a structured block", {"{", "if", "while", "for"});
  }

  StmtPtr parseIf() {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::If;
    s->pos = take().pos;
    expectPunct("(");
    s->expr = parseExpr();
    expectPunct(")");
    s->body = parseStmt();
    if (atKw("else")) {
      take();
      s->elseBody = parseStmt();
    }
    return s;
  }

  StmtPtr parseWhile() {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::While;
    s->pos = take().pos;
    expectPunct("(");
    s->expr = parseExpr();
    expectPunct(")");
    s->body = parseStmt();
    return s;
  }

  StmtPtr parseFor() {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::For;
    s->pos = take().pos;
    expectPunct("(");
    if (!atPunct(";")) s->init = parseAssignOrCallNoSemi();
    expectPunct(";");
    if (!atPunct(";")) s->expr = parseExpr();
    expectPunct(";");
    if (!atPunct(")")) s->incr = parseAssignOrCallNoSemi();
    expectPunct(")");
    s->body = parseStmt();
    return s;
  }

  StmtPtr parseAssignOrCall() {
    auto s = parseAssignOrCallNoSemi();
    expectPunct(";");
    return s;
  }

  StmtPtr parseAssignOrCallNoSemi() {
    auto s = std::make_unique<Stmt>();
    s->pos = cur().pos;
    ExprPtr e = parseUnary();
    if (atPunct("=") || atPunct("+=") || atPunct("-=") || atPunct("*=")) {
      std::string op = take().lexeme;
      if (e->kind != Expr::Kind::Ident && e->kind != Expr::Kind::Index &&
          !(e->kind == Expr::Kind::Unary && e->text == "*"))
        fail(DiagKind::Syntax, e->pos, "assignment target must be a variable, element or dereference");
      s->kind = Stmt::Kind::Assign;
      ExprPtr rhs = parseExpr();
      if (op != "=") {
        auto bin = std::make_unique<Expr>();
        bin->kind = Expr::Kind::Binary;
        bin->pos = s->pos;
        bin->text = op.substr(0, 1);
        bin->lhs = cloneExpr(*e);
        bin->rhs = std::move(rhs);
        rhs = std::move(bin);
      }
      s->lhs = std::move(e);
      s->expr = std::move(rhs);
      return s;
    }
    if (e->kind != Expr::Kind::Call)
      fail(DiagKind::Syntax, e->pos, "expected assignment or call statement");
    s->kind = Stmt::Kind::ExprStmt;
    s->expr = std::move(e);
    return s;
  }

  // ----- expressions -----

  ExprPtr parseExpr() { return parseBinary(0); }

  static int binPrec(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/" || op == "%") return 6;
    return 0;
  }

  ExprPtr parseBinary(int minPrec) {
    ExprPtr lhs = parseUnary();
    while (at(TokenKind::Punct)) {
      int prec = binPrec(cur().lexeme);
      if (prec == 0 || prec < minPrec) break;
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Binary;
      e->pos = cur().pos;
      e->text = take().lexeme;
      e->lhs = std::move(lhs);
      e->rhs = parseBinary(prec + 1);
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr parseUnary() {
    if (atPunct("-") || atPunct("!") || atPunct("&") || atPunct("*")) {
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Unary;
      e->pos = cur().pos;
      e->text = take().lexeme;
      e->lhs = parseUnary();
      return e;
    }
    return parsePostfix();
  }

  ExprPtr parsePostfix() {
    ExprPtr e = parsePrimary();
    while (atPunct("[")) {
      auto idx = std::make_unique<Expr>();
      idx->kind = Expr::Kind::Index;
      idx->pos = take().pos;
      idx->lhs = std::move(e);
      idx->args.push_back(parseExpr());
      expectPunct("]");
      e = std::move(idx);
    }
    return e;
  }

  ExprPtr parsePrimary() {
    auto e = std::make_unique<Expr>();
    e->pos = cur().pos;
    if (at(TokenKind::IntLit)) {
      e->kind = Expr::Kind::IntLit;
      e->intValue = take().intValue;
      return e;
    }
    if (at(TokenKind::FloatLit)) {
      e->kind = Expr::Kind::FloatLit;
      e->floatValue = take().floatValue;
      return e;
    }
    if (at(TokenKind::StringLit)) {
      e->kind = Expr::Kind::StringLit;
      e->text = take().stringValue;
      return e;
    }
    if (atKw("NULL")) {
      take();
      e->kind = Expr::Kind::NullLit;
      return e;
    }
    if (atKw("sizeof")) {
      take();
      e->kind = Expr::Kind::SizeOf;
      expectPunct("(");
      e->sizeofType = parseTypePrefix();
      expectPunct(")");
      return e;
    }
    if (atPunct("(")) {
      take();
      ExprPtr inner = parseExpr();
      expectPunct(")");
      return inner;
    }
    if (at(TokenKind::Identifier)) {
      std::string name = take().lexeme;
      if (atPunct("(")) {
        take();
        e->kind = Expr::Kind::Call;
        e->text = std::move(name);
        if (!atPunct(")")) {
          while (true) {
            e->args.push_back(parseExpr());
            if (atPunct(",")) { take(); continue; }
            break;
          }
        }
        expectPunct(")");
        return e;
      }
      e->kind = Expr::Kind::Ident;
      e->text = std::move(name);
      return e;
    }
    fail(DiagKind::Syntax, cur().pos, "expected expression, found '" + cur().lexeme + "'",
         {"expression"});
  }

  const std::vector<Token>& toks_;
  size_t pos_ = 0;
  std::vector<Diagnostic> diags_;
};

}  // namespace

ParseResult parse(const std::vector<Token>& tokens) { return Parser(tokens).run(); }

ParseResult parseSource(std::string_view source) {
  LexResult lex = tokenize(source);
  if (!lex.ok()) {
    ParseResult r;
    r.diagnostics = std::move(lex.diagnostics);
    return r;
  }
  return parse(lex.tokens);
}

}  // namespace rolex
