#include "rolex/validate.hpp"

#include <map>
#include <set>

#include "rolex/printer.hpp"

namespace rolex {

namespace {

class Resolver {
 public:
  explicit Resolver(Program& p) : prog_(p) {}

  std::vector<Diagnostic> run() {
    prog_.symbols.clear();
    // file-scope pass: globals and function signatures first, so forward
    // references between functions work
    for (auto& g : prog_.globals) declareSymbol(g, SymbolScope::Global, -1);
    for (auto& g : prog_.globals) {
      if (g.init) {
        curFunction_ = -1;
        resolveExpr(*g.init);
        checkInitAssignable(g, *g.init);
      }
      checkQualifier(g);
    }
    for (size_t fi = 0; fi < prog_.functions.size(); fi++) resolveFunction(static_cast<int>(fi));
    for (size_t fi = 0; fi < prog_.functions.size(); fi++)
      checkDeclareDirective(prog_.functions[fi]);
    checkRecursion();
    for (auto& g : prog_.globals)
      if (g.init && !isConstExpr(*g.init))
        error(g.pos, "global initializer must be a constant expression");
    for (auto& fn : prog_.functions)
      if (fn.body) checkCallPlacement(*fn.body);
    prog_.resolved = diags_.empty();
    return std::move(diags_);
  }

 private:
  void error(SourcePos pos, std::string msg, DiagKind kind = DiagKind::Semantic) {
    Diagnostic d;
    d.kind = kind;
    d.pos = pos;
    d.message = std::move(msg);
    diags_.push_back(std::move(d));
  }

  int declareSymbol(VarDecl& d, SymbolScope scope, int fnIndex) {
    SymbolInfo s;
    s.name = d.name;
    s.type = d.type;
    s.qualifier = d.qualifier;
    s.scope = scope;
    s.functionIndex = fnIndex;
    if (scope == SymbolScope::Global) {
      s.constructId = d.name;
      if (globalScope_.count(d.name))
        error(d.pos, "redefinition of global '" + d.name + "'");
    } else {
      s.constructId = prog_.functions[fnIndex].name + "::" + d.name;
      int n = ++localNameCount_[s.constructId];
      if (n > 1) s.constructId += "$" + std::to_string(n - 1);
    }
    int id = static_cast<int>(prog_.symbols.size());
    prog_.symbols.push_back(std::move(s));
    d.symbolId = id;
    if (scope == SymbolScope::Global) globalScope_[d.name] = id;
    return id;
  }

  int lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    auto g = globalScope_.find(name);
    return g == globalScope_.end() ? -1 : g->second;
  }

  void resolveFunction(int fi) {
    FunctionDecl& fn = prog_.functions[fi];
    if (prog_.findFunction(fn.name) != fi)
      error(fn.pos, "redefinition of function '" + fn.name + "'");
    if (globalScope_.count(fn.name))
      error(fn.pos, "'" + fn.name + "' is already a global variable");
    curFunction_ = fi;
    scopes_.clear();
    scopes_.emplace_back();
    for (auto& p : fn.params) {
      if (scopes_.back().count(p.name))
        error(p.pos, "duplicate parameter '" + p.name + "'");
      int id = declareSymbol(p, SymbolScope::Param, fi);
      scopes_.back()[p.name] = id;
    }
    if (fn.body) resolveStmt(*fn.body, fn, 0, 0);
    scopes_.clear();
    curFunction_ = -1;
  }

  // directiveDepth > 0 while inside a directive body; loopDepth counts loops
  // entered inside the innermost directive body (for break/continue checks).
  void resolveStmt(Stmt& s, FunctionDecl& fn, int directiveDepth, int loopDepth) {
    switch (s.kind) {
      case Stmt::Kind::Block:
        scopes_.emplace_back();
        for (auto& st : s.stmts) resolveStmt(*st, fn, directiveDepth, loopDepth);
        scopes_.pop_back();
        return;
      case Stmt::Kind::Decl: {
        if (s.decl.init) resolveExpr(*s.decl.init);
        if (scopes_.back().count(s.decl.name))
          error(s.decl.pos, "redefinition of '" + s.decl.name + "' in the same scope");
        int id = declareSymbol(s.decl, SymbolScope::Local, curFunction_);
        scopes_.back()[s.decl.name] = id;
        if (s.decl.init) checkInitAssignable(s.decl, *s.decl.init);
        checkQualifier(s.decl);
        if (s.decl.type.isVoid()) error(s.decl.pos, "variables cannot have void type");
        return;
      }
      case Stmt::Kind::Assign: {
        resolveExpr(*s.lhs);
        resolveExpr(*s.expr);
        checkAssign(s);
        return;
      }
      case Stmt::Kind::ExprStmt:
        resolveExpr(*s.expr);
        if (directiveDepth > 0) checkNoHeapOps(*s.expr);
        return;
      case Stmt::Kind::If:
        resolveExpr(*s.expr);
        resolveStmt(*s.body, fn, directiveDepth, loopDepth);
        if (s.elseBody) resolveStmt(*s.elseBody, fn, directiveDepth, loopDepth);
        return;
      case Stmt::Kind::While:
        resolveExpr(*s.expr);
        resolveStmt(*s.body, fn, directiveDepth, loopDepth + 1);
        return;
      case Stmt::Kind::For:
        if (s.init) resolveStmt(*s.init, fn, directiveDepth, loopDepth);
        if (s.expr) resolveExpr(*s.expr);
        if (s.incr) resolveStmt(*s.incr, fn, directiveDepth, loopDepth);
        resolveStmt(*s.body, fn, directiveDepth, loopDepth + 1);
        return;
      case Stmt::Kind::Return:
        if (directiveDepth > 0)
          error(s.pos, "branch out of structured block: return inside a directive body");
        if (s.expr) {
          resolveExpr(*s.expr);
          if (fn.returnType.isVoid())
            error(s.pos, "void function '" + fn.name + "' returns a value");
        } else if (!fn.returnType.isVoid()) {
          error(s.pos, "non-void function '" + fn.name + "' returns without a value");
        }
        return;
      case Stmt::Kind::Break:
      case Stmt::Kind::Continue:
        if (directiveDepth > 0 && loopDepth == 0)
          error(s.pos, "branch out of structured block: '" +
                           std::string(s.kind == Stmt::Kind::Break ? "break" : "continue") +
                           "' targets a loop outside the directive body");
        else if (directiveDepth == 0 && loopDepth == 0)
          error(s.pos, "break/continue outside of a loop");
        return;
      case Stmt::Kind::Print:
        if (directiveDepth > 0)
          error(s.pos, "print is not permitted inside a directive body");
        for (auto& a : s.args) resolveExpr(*a);
        return;
      case Stmt::Kind::Directive: {
        resolveDirectiveClauses(*s.directive, s.pos);
        // loop counting restarts: break/continue may not leave the block
        resolveStmt(*s.body, fn, directiveDepth + 1, 0);
        checkDirectiveBody(s);
        return;
      }
    }
  }

  void resolveDirectiveClauses(Directive& dir, SourcePos pos) {
    for (auto& c : dir.clauses) {
      if (c.kind == Clause::Kind::Ameliorate) {
        c.functionIndex = prog_.findFunction(c.function);
        if (c.functionIndex < 0)
          error(c.pos, "ameliorate function '" + c.function + "' is not declared");
        else
          checkRecoveryFnSignature(c.functionIndex, c.pos);
        continue;
      }
      if (c.kind == Clause::Kind::Fallback) {
        if (c.fallbackValue && c.fallbackValue->kind == Expr::Kind::Ident)
          resolveExpr(*c.fallbackValue);
        continue;
      }
      c.varSymbols.clear();
      for (const auto& v : c.vars) {
        int id = lookup(v);
        if (id < 0) {
          error(c.pos, "clause variable '" + v + "' is not visible at the directive");
          c.varSymbols.push_back(-1);
          continue;
        }
        c.varSymbols.push_back(id);
      }
    }
    (void)pos;
  }

  // no shadowing of clause-listed variables inside the block; the clause
  // must name one unambiguous storage location
  void checkDirectiveBody(Stmt& s) {
    std::set<std::string> clauseNames;
    for (const auto& c : s.directive->clauses)
      for (const auto& v : c.vars) clauseNames.insert(v);
    if (!clauseNames.empty()) checkShadowing(*s.body, clauseNames);
  }

  void checkShadowing(const Stmt& s, const std::set<std::string>& names) {
    if (s.kind == Stmt::Kind::Decl && names.count(s.decl.name))
      error(s.decl.pos, "'" + s.decl.name + "' shadows a clause variable inside the block");
    if (s.init) checkShadowing(*s.init, names);
    if (s.incr) checkShadowing(*s.incr, names);
    if (s.body) checkShadowing(*s.body, names);
    if (s.elseBody) checkShadowing(*s.elseBody, names);
    for (const auto& st : s.stmts) checkShadowing(*st, names);
  }

  void checkNoHeapOps(const Expr& e) {
    if (e.kind == Expr::Kind::Call &&
        (e.builtin == BuiltinId::Malloc || e.builtin == BuiltinId::Free ||
         e.builtin == BuiltinId::RolexMallocTolerant ||
         e.builtin == BuiltinId::RolexMallocRobust ||
         e.builtin == BuiltinId::RolexMallocRepairable))
      error(e.pos, "heap management is not permitted inside a directive body");
  }

  void checkAssign(Stmt& s) {
    if (s.lhs->type.isArray()) {
      error(s.lhs->pos, "arrays cannot be assigned as a whole");
      return;
    }
    // heap allocation calls adopt the element kind of their destination
    if (s.expr->kind == Expr::Kind::Call && isMallocFamily(s.expr->builtin)) {
      if (!s.lhs->type.isPointer()) {
        error(s.expr->pos, "allocation result must be assigned to a pointer");
        return;
      }
      s.expr->heapElementKind = s.lhs->type.pointeeKind();
      s.expr->type = s.lhs->type;
      return;
    }
    checkConvertible(s.expr->type, s.lhs->type, s.pos);
  }

  void checkInitAssignable(VarDecl& d, Expr& init) {
    if (d.type.isArray()) {
      error(d.pos, "array initializers are not supported");
      return;
    }
    if (init.kind == Expr::Kind::Call && isMallocFamily(init.builtin)) {
      if (!d.type.isPointer()) {
        error(init.pos, "allocation result must be assigned to a pointer");
        return;
      }
      init.heapElementKind = d.type.pointeeKind();
      init.type = d.type;
      return;
    }
    checkConvertible(init.type, d.type, d.pos);
  }

  static bool isMallocFamily(BuiltinId b) {
    return b == BuiltinId::Malloc || b == BuiltinId::RolexMallocTolerant ||
           b == BuiltinId::RolexMallocRobust || b == BuiltinId::RolexMallocRepairable;
  }

  void checkConvertible(const Type& from, const Type& to, SourcePos pos) {
    if (to.isPointer()) {
      if (from.isPointer() || (from.scalar == Scalar::Void && from.pointerDepth == 1)) return;
      error(pos, "cannot convert '" + typeToString(from) + "' to '" + typeToString(to) + "'");
      return;
    }
    if (from.isPointer() || from.isArray())
      error(pos, "cannot convert '" + typeToString(from) + "' to '" + typeToString(to) + "'");
  }

  void checkQualifier(VarDecl& d) {
    const Qualifier& q = d.qualifier;
    switch (q.kind) {
      case Qualifier::Kind::None:
        return;
      case Qualifier::Kind::Tolerant: {
        if (d.type.isPointer()) {
          error(d.pos, "pointers cannot be tolerant-qualified");
          return;
        }
        if (!q.limit) return;
        ElementKind ek = d.type.elementKind();
        bool isFloat = ek == ElementKind::F32 || ek == ElementKind::F64;
        if (q.limit->kind == ToleranceLimit::Kind::Maximus) {
          if (isFloat) {
            error(d.pos, "MAXIMUS applies to integer types only");
            return;
          }
          uint64_t typeMax = ek == ElementKind::U32 ? 0xffffffffull : 0x7fffffffull;
          if (q.limit->value > typeMax)
            error(d.pos, "maximus exceeds 32-bit range");
        } else {
          if (!isFloat) {
            error(d.pos, "PRECISION applies to floating-point types only");
            return;
          }
          int width = ek == ElementKind::F32 ? 23 : 52;
          if (mantissaBitsForDecimalDigits(q.limit->value) > width)
            error(d.pos, "precision exceeds the mantissa width of " + typeToString(d.type));
        }
        return;
      }
      case Qualifier::Kind::Robust:
        // scalars, pointers and arrays all replicate
        return;
      case Qualifier::Kind::Heal: {
        int fi = prog_.findFunction(q.healFunction);
        if (fi < 0) {
          error(d.pos, "heal function '" + q.healFunction + "' is not declared");
          return;
        }
        checkRecoveryFnSignature(fi, d.pos);
        return;
      }
    }
  }

  // recovery functions are int fn(void): nonzero return means repaired
  void checkRecoveryFnSignature(int fi, SourcePos pos) {
    const FunctionDecl& fn = prog_.functions[fi];
    if (!fn.params.empty() || !(fn.returnType.isScalar() && fn.returnType.scalar == Scalar::I32))
      error(pos, "recovery function '" + fn.name + "' must have signature 'int " + fn.name + "()'");
    if (!fn.body) error(pos, "recovery function '" + fn.name + "' has no definition");
  }

  void checkDeclareDirective(FunctionDecl& fn) {
    if (!fn.declareDirective) return;
    Directive& d = *fn.declareDirective;
    const Clause* fb = d.findClause(Clause::Kind::Fallback);
    for (auto& c : d.clauses) {
      if (c.kind != Clause::Kind::Fallback || !c.fallbackValue) continue;
      if (c.fallbackValue->kind == Expr::Kind::Ident) {
        auto g = globalScope_.find(c.fallbackValue->text);
        if (g == globalScope_.end()) {
          error(c.pos, "fallback '" + c.fallbackValue->text + "' must name a global scalar");
          continue;
        }
        c.fallbackValue->symbolId = g->second;
        if (!prog_.symbols[static_cast<size_t>(g->second)].type.isScalar())
          error(c.pos, "fallback '" + c.fallbackValue->text + "' must name a global scalar");
      }
    }
    if (!fn.body) {
      error(d.pos, "declare directives require a function definition");
      return;
    }
    if (fn.name == "main") {
      error(d.pos, "main cannot carry a declare directive");
      return;
    }
    bool isVoid = fn.returnType.isVoid();
    if (d.declareMode == Directive::DeclareMode::Robust) {
      if (isVoid || !fn.returnType.isScalar())
        error(d.pos, "declare resilient robust requires a scalar-returning function");
      return;
    }
    if (d.declareMode == Directive::DeclareMode::Ignore && !isVoid && !fb)
      error(d.pos, "declare resilient ignore on a value-returning function needs a fallback");
    if (fb && fb->fallbackValue && isVoid)
      error(d.pos, "fallback value given for a void function");
  }

  static bool isConstExpr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
      case Expr::Kind::FloatLit:
      case Expr::Kind::NullLit:
      case Expr::Kind::SizeOf:
        return true;
      case Expr::Kind::Unary:
        return (e.text == "-" || e.text == "!") && isConstExpr(*e.lhs);
      case Expr::Kind::Binary:
        return e.text != "%" && isConstExpr(*e.lhs) && isConstExpr(*e.rhs);
      default:
        return false;
    }
  }

  // user-defined functions execute one frame per statement: calls may only
  // appear as a whole statement or the whole right-hand side of one
  void checkCallPlacement(const Stmt& s) {
    auto noUserCalls = [&](const Expr& e, auto&& self) -> void {
      if (e.kind == Expr::Kind::Call && e.calleeIndex >= 0)
        error(e.pos, "call to '" + e.text + "' must be a statement or the entire right-hand side");
      if (e.kind == Expr::Kind::Call && isMallocFamily(e.builtin))
        error(e.pos, "allocation must be the entire right-hand side of an assignment");
      if (e.lhs) self(*e.lhs, self);
      if (e.rhs) self(*e.rhs, self);
      for (const auto& a : e.args) self(*a, self);
    };
    auto checkRhs = [&](const Expr& e) {
      // the top node may be a call; its arguments may not contain user calls
      if (e.kind == Expr::Kind::Call) {
        for (const auto& a : e.args) noUserCalls(*a, noUserCalls);
        return;
      }
      noUserCalls(e, noUserCalls);
    };
    if (s.lhs) noUserCalls(*s.lhs, noUserCalls);
    if (s.kind == Stmt::Kind::Assign || s.kind == Stmt::Kind::ExprStmt) {
      if (s.expr) checkRhs(*s.expr);
    } else if (s.expr) {
      noUserCalls(*s.expr, noUserCalls);
    }
    if (s.kind == Stmt::Kind::Decl && s.decl.init) checkRhs(*s.decl.init);
    for (const auto& a : s.args) noUserCalls(*a, noUserCalls);
    if (s.init) checkCallPlacement(*s.init);
    if (s.incr) checkCallPlacement(*s.incr);
    if (s.body) checkCallPlacement(*s.body);
    if (s.elseBody) checkCallPlacement(*s.elseBody);
    for (const auto& st : s.stmts) checkCallPlacement(*st);
  }

  void checkRecursion() {
    // static local allocation leaves no room for reentrancy
    size_t n = prog_.functions.size();
    std::vector<std::set<int>> calls(n);
    for (size_t i = 0; i < n; i++)
      if (prog_.functions[i].body) collectCalls(*prog_.functions[i].body, calls[i]);
    std::vector<int> state(n, 0);
    for (size_t i = 0; i < n; i++)
      if (dfsCycle(static_cast<int>(i), calls, state)) {
        error(prog_.functions[i].pos, "recursive calls are not supported");
        return;
      }
  }

  void collectCalls(const Stmt& s, std::set<int>& out) {
    auto fromExpr = [&](const Expr& e, auto&& self) -> void {
      if (e.kind == Expr::Kind::Call && e.calleeIndex >= 0) out.insert(e.calleeIndex);
      if (e.lhs) self(*e.lhs, self);
      if (e.rhs) self(*e.rhs, self);
      for (const auto& a : e.args) self(*a, self);
    };
    if (s.lhs) fromExpr(*s.lhs, fromExpr);
    if (s.expr) fromExpr(*s.expr, fromExpr);
    if (s.decl.init) fromExpr(*s.decl.init, fromExpr);
    for (const auto& a : s.args) fromExpr(*a, fromExpr);
    if (s.init) collectCalls(*s.init, out);
    if (s.incr) collectCalls(*s.incr, out);
    if (s.body) collectCalls(*s.body, out);
    if (s.elseBody) collectCalls(*s.elseBody, out);
    for (const auto& st : s.stmts) collectCalls(*st, out);
  }

  bool dfsCycle(int i, const std::vector<std::set<int>>& calls, std::vector<int>& state) {
    if (state[i] == 1) return true;
    if (state[i] == 2) return false;
    state[i] = 1;
    for (int j : calls[i])
      if (dfsCycle(j, calls, state)) return true;
    state[i] = 2;
    return false;
  }

  // ----- expressions -----

  void resolveExpr(Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        e.type.scalar = e.intValue > 0x7fffffffull ? Scalar::U32 : Scalar::I32;
        return;
      case Expr::Kind::FloatLit:
        e.type.scalar = Scalar::F64;
        return;
      case Expr::Kind::StringLit:
        e.type.scalar = Scalar::Void;
        return;
      case Expr::Kind::NullLit:
        e.type.scalar = Scalar::Void;
        e.type.pointerDepth = 1;
        return;
      case Expr::Kind::SizeOf:
        e.type.scalar = Scalar::I32;
        return;
      case Expr::Kind::Ident: {
        int id = lookup(e.text);
        if (id < 0) {
          error(e.pos, "use of undeclared identifier '" + e.text + "'");
          e.type.scalar = Scalar::I32;
          return;
        }
        e.symbolId = id;
        e.type = prog_.symbols[id].type;
        return;
      }
      case Expr::Kind::Unary: {
        resolveExpr(*e.lhs);
        if (e.text == "&") {
          const Type& t = e.lhs->type;
          if (e.lhs->kind != Expr::Kind::Ident && e.lhs->kind != Expr::Kind::Index) {
            error(e.pos, "address-of requires a variable or element");
            e.type.scalar = Scalar::I32;
            return;
          }
          e.type.scalar = t.scalar;
          e.type.pointerDepth = 1;
          e.type.arrayDims.clear();
          return;
        }
        if (e.text == "*") {
          const Type& t = e.lhs->type;
          if (!t.isPointer() && !t.isArray()) {
            error(e.pos, "cannot dereference '" + typeToString(t) + "'");
            e.type.scalar = Scalar::I32;
            return;
          }
          e.type.scalar = t.scalar;
          e.type.pointerDepth = 0;
          e.type.arrayDims.clear();
          return;
        }
        if (e.text == "!") {
          e.type.scalar = Scalar::I32;
          return;
        }
        e.type = e.lhs->type;  // unary minus
        return;
      }
      case Expr::Kind::Binary: {
        resolveExpr(*e.lhs);
        resolveExpr(*e.rhs);
        const std::string& op = e.text;
        const Type& a = e.lhs->type;
        const Type& b = e.rhs->type;
        if (op == "==" || op == "!=" || op == "<" || op == ">" || op == "<=" ||
            op == ">=" || op == "&&" || op == "||") {
          e.type.scalar = Scalar::I32;
          return;
        }
        if (op == "%" && (a.isFloat() || b.isFloat())) {
          error(e.pos, "operands of '%' must be integers");
          e.type.scalar = Scalar::I32;
          return;
        }
        bool aptr = a.isPointer() || a.isArray();
        bool bptr = b.isPointer() || b.isArray();
        if (aptr || bptr) {
          if (op != "+" && op != "-") {
            error(e.pos, "invalid pointer arithmetic '" + op + "'");
            e.type.scalar = Scalar::I32;
            return;
          }
          if (aptr && bptr) {
            if (op != "-") error(e.pos, "pointers can only be subtracted");
            e.type.scalar = Scalar::I32;
            e.type.pointerDepth = 0;
            return;
          }
          const Type& p = aptr ? a : b;
          e.type.scalar = p.scalar;
          e.type.pointerDepth = 1;
          e.type.arrayDims.clear();
          return;
        }
        if (a.scalar == Scalar::F64 || b.scalar == Scalar::F64) e.type.scalar = Scalar::F64;
        else if (a.scalar == Scalar::F32 || b.scalar == Scalar::F32) e.type.scalar = Scalar::F32;
        else if (a.scalar == Scalar::U32 || b.scalar == Scalar::U32) e.type.scalar = Scalar::U32;
        else e.type.scalar = Scalar::I32;
        return;
      }
      case Expr::Kind::Index: {
        resolveExpr(*e.lhs);
        resolveExpr(*e.args[0]);
        const Type& t = e.lhs->type;
        if (t.isArray()) {
          e.type.scalar = t.scalar;
          e.type.pointerDepth = t.pointerDepth;
          e.type.arrayDims.assign(t.arrayDims.begin() + 1, t.arrayDims.end());
          return;
        }
        if (t.isPointer()) {
          e.type.scalar = t.scalar;
          e.type.pointerDepth = 0;
          return;
        }
        error(e.pos, "cannot index '" + typeToString(t) + "'");
        e.type.scalar = Scalar::I32;
        return;
      }
      case Expr::Kind::Call:
        resolveCall(e);
        return;
    }
  }

  void resolveCall(Expr& e) {
    bool fnRefArg = builtinFromName(e.text) == BuiltinId::RolexMallocRepairable;
    for (size_t i = 0; i < e.args.size(); i++) {
      if (fnRefArg && i == 1 && e.args[i]->kind == Expr::Kind::Ident) continue;
      resolveExpr(*e.args[i]);
    }
    int fi = prog_.findFunction(e.text);
    if (fi >= 0) {
      e.calleeIndex = fi;
      const FunctionDecl& fn = prog_.functions[fi];
      if (e.args.size() != fn.params.size()) {
        error(e.pos, "call to '" + e.text + "' with " + std::to_string(e.args.size()) +
                         " arguments; expected " + std::to_string(fn.params.size()));
        return;
      }
      for (size_t i = 0; i < e.args.size(); i++)
        checkConvertible(e.args[i]->type, fn.params[i].type, e.args[i]->pos);
      e.type = fn.returnType;
      return;
    }
    e.builtin = builtinFromName(e.text);
    if (e.builtin == BuiltinId::None) {
      error(e.pos, "call to undeclared function '" + e.text + "'");
      return;
    }
    switch (e.builtin) {
      case BuiltinId::Malloc:
        requireArgs(e, 1);
        e.type.scalar = Scalar::Void;
        e.type.pointerDepth = 1;
        return;
      case BuiltinId::RolexMallocTolerant: {
        requireArgs(e, 2);
        const Expr& lim = *e.args[1];
        bool ok = lim.kind == Expr::Kind::NullLit ||
                  (lim.kind == Expr::Kind::Call && lim.builtin == BuiltinId::RolexPrecisionCast);
        if (!ok)
          error(e.pos, "second argument must be NULL or rolex_precision(value)");
        e.type.scalar = Scalar::Void;
        e.type.pointerDepth = 1;
        return;
      }
      case BuiltinId::RolexMallocRobust: {
        requireArgs(e, 2);
        const Expr& st = *e.args[1];
        if (st.kind != Expr::Kind::IntLit || (st.intValue != 2 && st.intValue != 3))
          error(e.pos, "redundancy strength must be the literal 2 or 3");
        e.type.scalar = Scalar::Void;
        e.type.pointerDepth = 1;
        return;
      }
      case BuiltinId::RolexMallocRepairable: {
        requireArgs(e, 2);
        Expr& fnArg = *e.args[1];
        if (fnArg.kind != Expr::Kind::Ident) {
          error(e.pos, "second argument must name a recovery function");
        } else {
          int rfi = prog_.findFunction(fnArg.text);
          if (rfi < 0)
            error(fnArg.pos, "recovery function '" + fnArg.text + "' is not declared");
          else {
            fnArg.calleeIndex = rfi;
            checkRecoveryFnSignature(rfi, fnArg.pos);
          }
        }
        e.type.scalar = Scalar::Void;
        e.type.pointerDepth = 1;
        return;
      }
      case BuiltinId::RolexPrecisionCast:
        requireArgs(e, 1);
        if (e.args[0]->kind != Expr::Kind::IntLit || e.args[0]->intValue == 0)
          error(e.pos, "rolex_precision takes a positive integer literal");
        e.type.scalar = Scalar::I32;
        return;
      case BuiltinId::Free:
      case BuiltinId::RolexValidateRobust:
      case BuiltinId::RolexAmeliorateHeal:
        requireArgs(e, 1);
        e.type.scalar = Scalar::Void;
        return;
      case BuiltinId::ArgNum:
        requireArgs(e, 1);
        e.type.scalar = Scalar::F64;
        return;
      case BuiltinId::Sqrt:
      case BuiltinId::Fabs:
        requireArgs(e, 1);
        e.type.scalar = Scalar::F64;
        return;
      case BuiltinId::RtlInitialize:
      case BuiltinId::RtlFinalize:
        e.type.scalar = Scalar::Void;
        return;
      case BuiltinId::RtlPreserveState:
      case BuiltinId::RtlRestoreState:
      case BuiltinId::RtlJmpFwd:
      case BuiltinId::RtlJmpBack:
      case BuiltinId::RtlRegister:
      case BuiltinId::RtlDeregister:
        requireArgs(e, 1);
        requireStringArg(e, 0);
        e.type.scalar = Scalar::Void;
        return;
      case BuiltinId::RtlCreateCheckpoint:
      case BuiltinId::RtlRestoreCheckpoint:
        requireArgs(e, 2);
        requireStringArg(e, 0);
        e.type.scalar = Scalar::Void;
        return;
      case BuiltinId::RtlCopy:
        requireArgs(e, 1);
        e.type.scalar = Scalar::Void;
        return;
      case BuiltinId::RtlCompare:
        if (e.args.size() < 3 || e.args.size() > 4) {
          error(e.pos, "__rolex_compare takes a context and 2 or 3 locations");
          return;
        }
        requireStringArg(e, 0);
        e.type.scalar = Scalar::Void;
        return;
      default:
        error(e.pos, "'" + e.text + "' cannot be called here");
        return;
    }
  }

  void requireArgs(Expr& e, size_t n) {
    if (e.args.size() != n)
      error(e.pos, "'" + e.text + "' takes " + std::to_string(n) + " argument(s)");
  }
  void requireStringArg(Expr& e, size_t i) {
    if (i < e.args.size() && e.args[i]->kind != Expr::Kind::StringLit)
      error(e.pos, "argument " + std::to_string(i + 1) + " of '" + e.text +
                       "' must be a string literal");
  }

  Program& prog_;
  std::vector<Diagnostic> diags_;
  std::map<std::string, int> globalScope_;
  std::vector<std::map<std::string, int>> scopes_;
  std::map<std::string, int> localNameCount_;
  int curFunction_ = -1;
};

}  // namespace

std::vector<Diagnostic> validate(Program& program) { return Resolver(program).run(); }

}  // namespace rolex
