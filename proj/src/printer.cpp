#include "rolex/printer.hpp"

#include <cstdio>

namespace rolex {

namespace {

std::string scalarName(Scalar s) {
  switch (s) {
    case Scalar::Void: return "void";
    case Scalar::I32: return "int";
    case Scalar::U32: return "unsigned int";
    case Scalar::F32: return "float";
    case Scalar::F64: return "double";
  }
  return "?";
}

std::string floatLiteral(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

std::string escapeString(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  out += "\"";
  return out;
}

class Printer {
 public:
  std::string run(const Program& p) {
    for (const auto& [isFn, idx] : p.order) {
      if (isFn)
        printFunction(p.functions[idx]);
      else {
        printDecl(p.globals[idx]);
        out_ += ";\n";
      }
    }
    return out_;
  }

 private:
  void indent() { out_.append(static_cast<size_t>(depth_) * 4, ' '); }

  void printQualifier(const Qualifier& q) {
    switch (q.kind) {
      case Qualifier::Kind::None:
        return;
      case Qualifier::Kind::Tolerant:
        out_ += "tolerant";
        if (q.limit) {
          out_ += q.limit->kind == ToleranceLimit::Kind::Precision ? " (PRECISION = "
                                                                   : " (MAXIMUS = ";
          out_ += std::to_string(q.limit->value) + ")";
        }
        out_ += " ";
        return;
      case Qualifier::Kind::Robust:
        out_ += q.strength == Strength::Correct ? "robust (CORRECT) " : "robust (DETECT) ";
        return;
      case Qualifier::Kind::Heal:
        out_ += "heal (" + q.healFunction + "()) ";
        return;
    }
  }

  void printDecl(const VarDecl& d) {
    printQualifier(d.qualifier);
    out_ += scalarName(d.type.scalar);
    out_ += d.type.pointerDepth > 0 ? "* " : " ";
    out_ += d.name;
    for (int64_t dim : d.type.arrayDims) out_ += "[" + std::to_string(dim) + "]";
    if (d.init) {
      out_ += " = ";
      printExpr(*d.init, 0);
    }
  }

  void printDirectiveLine(const Directive& d) {
    out_ += "#pragma rolex ";
    switch (d.kind) {
      case Directive::Kind::RecoverRollback: out_ += "recover-rollback"; break;
      case Directive::Kind::RecoverRollforward: out_ += "recover-rollforward"; break;
      case Directive::Kind::Robust:
        out_ += d.strength == Strength::Correct ? "robust correct" : "robust detect";
        break;
      case Directive::Kind::DeclareResilient:
        out_ += "declare resilient";
        switch (d.declareMode) {
          case Directive::DeclareMode::Retry: out_ += " retry"; break;
          case Directive::DeclareMode::Ignore: out_ += " ignore"; break;
          case Directive::DeclareMode::Robust:
            out_ += d.strength == Strength::Correct ? " robust (correct)" : " robust (detect)";
            break;
          case Directive::DeclareMode::None: break;
        }
        break;
    }
    for (const auto& c : d.clauses) {
      out_ += " ";
      switch (c.kind) {
        case Clause::Kind::Share: out_ += "share"; break;
        case Clause::Kind::Private: out_ += "private"; break;
        case Clause::Kind::Compare: out_ += "compare"; break;
        case Clause::Kind::Reinitialize: out_ += "reinitialize"; break;
        case Clause::Kind::Ameliorate: out_ += "ameliorate(" + c.function + "())"; continue;
        case Clause::Kind::Fallback:
          out_ += "fallback(";
          if (c.fallbackValue) printExpr(*c.fallbackValue, 0);
          out_ += ")";
          continue;
        case Clause::Kind::Default:
          out_ += c.defaultShared ? "default(shared)" : "default(none)";
          continue;
      }
      out_ += "(";
      for (size_t i = 0; i < c.vars.size(); i++) {
        if (i) out_ += ", ";
        out_ += c.vars[i];
      }
      out_ += ")";
    }
    out_ += "\n";
  }

  void printFunction(const FunctionDecl& f) {
    if (f.declareDirective) printDirectiveLine(*f.declareDirective);
    out_ += scalarName(f.returnType.scalar);
    out_ += f.returnType.pointerDepth > 0 ? "* " : " ";
    out_ += f.name + "(";
    for (size_t i = 0; i < f.params.size(); i++) {
      if (i) out_ += ", ";
      out_ += scalarName(f.params[i].type.scalar);
      out_ += f.params[i].type.pointerDepth > 0 ? "* " : " ";
      out_ += f.params[i].name;
    }
    out_ += ")";
    if (!f.body) {
      out_ += ";\n";
      return;
    }
    out_ += " ";
    printStmt(*f.body);
    out_ += "\n";
  }

  void printStmt(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Block: {
        out_ += "{\n";
        depth_++;
        for (const auto& st : s.stmts) {
          indent();
          printStmt(*st);
        }
        depth_--;
        indent();
        out_ += "}\n";
        return;
      }
      case Stmt::Kind::Decl:
        printDecl(s.decl);
        out_ += ";\n";
        return;
      case Stmt::Kind::Assign:
        printExpr(*s.lhs, 0);
        out_ += " = ";
        printExpr(*s.expr, 0);
        out_ += ";\n";
        return;
      case Stmt::Kind::ExprStmt:
        printExpr(*s.expr, 0);
        out_ += ";\n";
        return;
      case Stmt::Kind::If:
        out_ += "if (";
        printExpr(*s.expr, 0);
        out_ += ") ";
        printNested(*s.body);
        if (s.elseBody) {
          indent();
          out_ += "else ";
          printNested(*s.elseBody);
        }
        return;
      case Stmt::Kind::While:
        out_ += "while (";
        printExpr(*s.expr, 0);
        out_ += ") ";
        printNested(*s.body);
        return;
      case Stmt::Kind::For:
        out_ += "for (";
        if (s.init) printStmtInline(*s.init);
        out_ += "; ";
        if (s.expr) printExpr(*s.expr, 0);
        out_ += "; ";
        if (s.incr) printStmtInline(*s.incr);
        out_ += ") ";
        printNested(*s.body);
        return;
      case Stmt::Kind::Return:
        out_ += "return";
        if (s.expr) {
          out_ += " ";
          printExpr(*s.expr, 0);
        }
        out_ += ";\n";
        return;
      case Stmt::Kind::Break:
        out_ += "break;\n";
        return;
      case Stmt::Kind::Continue:
        out_ += "continue;\n";
        return;
      case Stmt::Kind::Print:
        out_ += "print(";
        for (size_t i = 0; i < s.args.size(); i++) {
          if (i) out_ += ", ";
          printExpr(*s.args[i], 0);
        }
        out_ += ");\n";
        return;
      case Stmt::Kind::Directive:
        printDirectiveLine(*s.directive);
        indent();
        printNested(*s.body);
        return;
    }
  }

  void printNested(const Stmt& s) {
    if (s.kind == Stmt::Kind::Block) {
      printStmt(s);
      return;
    }
    out_ += "\n";
    depth_++;
    indent();
    printStmt(s);
    depth_--;
  }

  void printStmtInline(const Stmt& s) {
    // for-init / for-incr: assignment or call without trailing ';'
    std::string saved;
    std::swap(saved, out_);
    printStmt(s);
    std::string inner = out_;
    std::swap(saved, out_);
    while (!inner.empty() && (inner.back() == '\n' || inner.back() == ';')) inner.pop_back();
    out_ += inner;
  }

  static int precOf(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/" || op == "%") return 6;
    return 7;
  }

  void printExpr(const Expr& e, int parentPrec) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        out_ += std::to_string(e.intValue);
        return;
      case Expr::Kind::FloatLit:
        out_ += floatLiteral(e.floatValue);
        return;
      case Expr::Kind::StringLit:
        out_ += escapeString(e.text);
        return;
      case Expr::Kind::NullLit:
        out_ += "NULL";
        return;
      case Expr::Kind::Ident:
        out_ += e.text;
        return;
      case Expr::Kind::SizeOf:
        out_ += "sizeof(" + scalarName(e.sizeofType.scalar) +
                std::string(e.sizeofType.pointerDepth > 0 ? "*" : "") + ")";
        return;
      case Expr::Kind::Unary: {
        bool paren = parentPrec > 6;
        if (paren) out_ += "(";
        out_ += e.text;
        printExpr(*e.lhs, 7);
        if (paren) out_ += ")";
        return;
      }
      case Expr::Kind::Binary: {
        int prec = precOf(e.text);
        bool paren = prec < parentPrec;
        if (paren) out_ += "(";
        printExpr(*e.lhs, prec);
        out_ += " " + e.text + " ";
        printExpr(*e.rhs, prec + 1);
        if (paren) out_ += ")";
        return;
      }
      case Expr::Kind::Index:
        printExpr(*e.lhs, 7);
        out_ += "[";
        printExpr(*e.args[0], 0);
        out_ += "]";
        return;
      case Expr::Kind::Call:
        out_ += e.text + "(";
        for (size_t i = 0; i < e.args.size(); i++) {
          if (i) out_ += ", ";
          printExpr(*e.args[i], 0);
        }
        out_ += ")";
        return;
    }
  }

  std::string out_;
  int depth_ = 0;
};

bool exprEq(const Expr* a, const Expr* b);
bool stmtEq(const Stmt* a, const Stmt* b);

bool exprEq(const Expr* a, const Expr* b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  if (a->intValue != b->intValue) return false;
  if (a->floatValue != b->floatValue) return false;
  if (a->text != b->text) return false;
  if (!(a->sizeofType == b->sizeofType)) return false;
  if (!exprEq(a->lhs.get(), b->lhs.get())) return false;
  if (!exprEq(a->rhs.get(), b->rhs.get())) return false;
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); i++)
    if (!exprEq(a->args[i].get(), b->args[i].get())) return false;
  return true;
}

bool qualifierEq(const Qualifier& a, const Qualifier& b) {
  if (a.kind != b.kind || a.strength != b.strength || a.healFunction != b.healFunction)
    return false;
  if (a.limit.has_value() != b.limit.has_value()) return false;
  if (a.limit && (a.limit->kind != b.limit->kind || a.limit->value != b.limit->value))
    return false;
  return true;
}

bool declEq(const VarDecl& a, const VarDecl& b) {
  return a.name == b.name && a.type == b.type && qualifierEq(a.qualifier, b.qualifier) &&
         exprEq(a.init.get(), b.init.get());
}

bool directiveEq(const Directive* a, const Directive* b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind || a->strength != b->strength || a->declareMode != b->declareMode)
    return false;
  if (a->clauses.size() != b->clauses.size()) return false;
  for (size_t i = 0; i < a->clauses.size(); i++) {
    const Clause& x = a->clauses[i];
    const Clause& y = b->clauses[i];
    if (x.kind != y.kind || x.vars != y.vars || x.function != y.function ||
        x.defaultShared != y.defaultShared)
      return false;
    if (!exprEq(x.fallbackValue.get(), y.fallbackValue.get())) return false;
  }
  return true;
}

bool stmtEq(const Stmt* a, const Stmt* b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  if (a->kind == Stmt::Kind::Decl && !declEq(a->decl, b->decl)) return false;
  if (!exprEq(a->lhs.get(), b->lhs.get())) return false;
  if (!exprEq(a->expr.get(), b->expr.get())) return false;
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); i++)
    if (!exprEq(a->args[i].get(), b->args[i].get())) return false;
  if (!stmtEq(a->init.get(), b->init.get())) return false;
  if (!stmtEq(a->incr.get(), b->incr.get())) return false;
  if (!stmtEq(a->body.get(), b->body.get())) return false;
  if (!stmtEq(a->elseBody.get(), b->elseBody.get())) return false;
  if (a->stmts.size() != b->stmts.size()) return false;
  for (size_t i = 0; i < a->stmts.size(); i++)
    if (!stmtEq(a->stmts[i].get(), b->stmts[i].get())) return false;
  if (!directiveEq(a->directive.get(), b->directive.get())) return false;
  return true;
}

}  // namespace

std::string typeToString(const Type& t) {
  std::string s = scalarName(t.scalar);
  for (int i = 0; i < t.pointerDepth; i++) s += "*";
  for (int64_t d : t.arrayDims) s += "[" + std::to_string(d) + "]";
  return s;
}

std::string toSource(const Program& p) { return Printer().run(p); }

bool structurallyEqual(const Program& a, const Program& b) {
  if (a.globals.size() != b.globals.size()) return false;
  if (a.functions.size() != b.functions.size()) return false;
  if (a.order != b.order) return false;
  for (size_t i = 0; i < a.globals.size(); i++)
    if (!declEq(a.globals[i], b.globals[i])) return false;
  for (size_t i = 0; i < a.functions.size(); i++) {
    const FunctionDecl& f = a.functions[i];
    const FunctionDecl& g = b.functions[i];
    if (f.name != g.name || !(f.returnType == g.returnType)) return false;
    if (f.params.size() != g.params.size()) return false;
    for (size_t j = 0; j < f.params.size(); j++)
      if (!declEq(f.params[j], g.params[j])) return false;
    if (!stmtEq(f.body.get(), g.body.get())) return false;
    if (!directiveEq(f.declareDirective.get(), g.declareDirective.get())) return false;
  }
  return true;
}

}  // namespace rolex
