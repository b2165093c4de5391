#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rolex/bitmask.hpp"
#include "rolex/diag.hpp"

namespace rolex {

enum class Scalar { Void, I32, U32, F32, F64 };

struct Type {
  Scalar scalar = Scalar::Void;
  int pointerDepth = 0;            // at most 1 in RC
  std::vector<int64_t> arrayDims;  // 0, 1 or 2 dimensions

  bool isVoid() const { return scalar == Scalar::Void && pointerDepth == 0; }
  bool isPointer() const { return pointerDepth > 0 && arrayDims.empty(); }
  bool isArray() const { return !arrayDims.empty(); }
  bool isScalar() const { return pointerDepth == 0 && arrayDims.empty() && scalar != Scalar::Void; }
  bool isFloat() const { return pointerDepth == 0 && (scalar == Scalar::F32 || scalar == Scalar::F64); }
  bool isInteger() const { return pointerDepth == 0 && (scalar == Scalar::I32 || scalar == Scalar::U32); }

  int64_t elementCount() const {
    int64_t n = 1;
    for (int64_t d : arrayDims) n *= d;
    return n;
  }
  // Kind of one stored element (for arrays: the element; for pointers: the
  // pointer itself).
  ElementKind elementKind() const {
    if (pointerDepth > 0) return ElementKind::Ptr;
    switch (scalar) {
      case Scalar::I32: return ElementKind::I32;
      case Scalar::U32: return ElementKind::U32;
      case Scalar::F32: return ElementKind::F32;
      case Scalar::F64: return ElementKind::F64;
      case Scalar::Void: return ElementKind::None;
    }
    return ElementKind::None;
  }
  // Scalar kind a pointer dereferences to.
  ElementKind pointeeKind() const {
    switch (scalar) {
      case Scalar::I32: return ElementKind::I32;
      case Scalar::U32: return ElementKind::U32;
      case Scalar::F32: return ElementKind::F32;
      case Scalar::F64: return ElementKind::F64;
      case Scalar::Void: return ElementKind::None;
    }
    return ElementKind::None;
  }
  int64_t byteSize() const { return elementCount() * elementSize(elementKind()); }

  bool operator==(const Type& o) const {
    return scalar == o.scalar && pointerDepth == o.pointerDepth && arrayDims == o.arrayDims;
  }
};

enum class Strength { None, Detect, Correct };
inline int strengthCopies(Strength s) { return s == Strength::Correct ? 3 : 2; }

struct ToleranceLimit {
  enum class Kind { Precision, Maximus };
  Kind kind = Kind::Maximus;
  uint64_t value = 0;
};

struct Qualifier {
  enum class Kind { None, Tolerant, Robust, Heal };
  Kind kind = Kind::None;
  std::optional<ToleranceLimit> limit;  // Tolerant only
  Strength strength = Strength::None;   // Robust only
  std::string healFunction;             // Heal only
  bool isRolex() const { return kind != Kind::None; }
};

// ---------------------------------------------------------------------------
// Expressions

enum class BuiltinId {
  None,
  Print,  // handled as a statement
  Malloc,
  Free,
  RolexMallocTolerant,
  RolexMallocRobust,
  RolexMallocRepairable,
  RolexValidateRobust,
  RolexAmeliorateHeal,
  RolexPrecisionCast,
  ArgNum,
  Sqrt,
  Fabs,
  // runtime library surface emitted by the transform
  RtlInitialize,
  RtlFinalize,
  RtlPreserveState,
  RtlRestoreState,
  RtlJmpFwd,
  RtlJmpBack,
  RtlCreateCheckpoint,
  RtlRestoreCheckpoint,
  RtlCopy,
  RtlRegister,
  RtlDeregister,
  RtlCompare,
};

BuiltinId builtinFromName(const std::string& name);
const char* builtinName(BuiltinId id);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct FunctionDecl;

struct Expr {
  enum class Kind {
    IntLit,
    FloatLit,
    StringLit,
    NullLit,
    Ident,
    Unary,    // op in text: - ! & *
    Binary,   // op in text
    Index,    // lhs[args...]
    Call,     // text = callee name
    SizeOf,   // sizeofType
  };
  Kind kind = Kind::IntLit;
  SourcePos pos;

  uint64_t intValue = 0;
  double floatValue = 0.0;
  std::string text;  // ident name, operator, callee, string value
  ExprPtr lhs;
  ExprPtr rhs;
  std::vector<ExprPtr> args;
  Type sizeofType;

  // resolution annotations
  int symbolId = -1;
  int calleeIndex = -1;  // Program::functions index
  BuiltinId builtin = BuiltinId::None;
  Type type;
  ElementKind heapElementKind = ElementKind::None;  // rolex_malloc_* target
};

ExprPtr cloneExpr(const Expr& e);

// ---------------------------------------------------------------------------
// Statements and directives

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct VarDecl {
  Qualifier qualifier;
  Type type;
  std::string name;
  ExprPtr init;
  SourcePos pos;
  int symbolId = -1;
};

struct Clause {
  enum class Kind { Share, Private, Compare, Reinitialize, Ameliorate, Fallback, Default };
  Kind kind = Kind::Share;
  SourcePos pos;
  std::vector<std::string> vars;  // Share/Private/Compare/Reinitialize
  std::string function;           // Ameliorate
  ExprPtr fallbackValue;          // Fallback (constant or identifier; absent for void)
  bool defaultShared = true;      // Default

  // resolution annotations
  std::vector<int> varSymbols;
  int functionIndex = -1;  // Ameliorate
};

struct Directive {
  enum class Kind { RecoverRollback, RecoverRollforward, Robust, DeclareResilient };
  enum class DeclareMode { None, Retry, Ignore, Robust };
  Kind kind = Kind::RecoverRollback;
  Strength strength = Strength::None;  // Robust directive / declare robust(...)
  DeclareMode declareMode = DeclareMode::None;
  std::vector<Clause> clauses;
  SourcePos pos;

  const Clause* findClause(Clause::Kind k) const {
    for (const auto& c : clauses)
      if (c.kind == k) return &c;
    return nullptr;
  }
};

struct Stmt {
  enum class Kind {
    Decl,
    Assign,
    ExprStmt,
    If,
    While,
    For,
    Return,
    Break,
    Continue,
    Print,
    Block,
    Directive,  // executable directive bound to a structured block
  };
  Kind kind = Kind::Block;
  SourcePos pos;

  VarDecl decl;                  // Decl
  ExprPtr lhs;                   // Assign target
  ExprPtr expr;                  // Assign rhs / ExprStmt / Return value / If-While-For cond
  std::vector<ExprPtr> args;     // Print
  StmtPtr init;                  // For
  StmtPtr incr;                  // For
  StmtPtr body;                  // If-then / While / For / Directive body
  StmtPtr elseBody;              // If
  std::vector<StmtPtr> stmts;    // Block
  std::unique_ptr<Directive> directive;  // Directive

  // True for statements the transform synthesized (replicas, votes, runtime
  // bracketing); used by tests and step accounting stays 1 per statement.
  bool synthetic = false;
};

StmtPtr cloneStmt(const Stmt& s);

struct FunctionDecl {
  Type returnType;
  std::string name;
  std::vector<VarDecl> params;
  StmtPtr body;  // Block; null for a bare declaration
  std::unique_ptr<Directive> declareDirective;
  SourcePos pos;
};

// ---------------------------------------------------------------------------
// Program and resolved symbols

enum class SymbolScope { Global, Local, Param };

struct SymbolInfo {
  std::string name;         // source name
  std::string constructId;  // global name or function::name
  Type type;
  Qualifier qualifier;
  SymbolScope scope = SymbolScope::Global;
  int functionIndex = -1;  // Local/Param
};

struct Program {
  std::vector<VarDecl> globals;
  std::vector<FunctionDecl> functions;
  // source order of top-level items: (isFunction, index)
  std::vector<std::pair<bool, int>> order;

  // filled by resolve()
  std::vector<SymbolInfo> symbols;
  bool resolved = false;

  int findFunction(const std::string& name) const {
    for (size_t i = 0; i < functions.size(); i++)
      if (functions[i].name == name) return static_cast<int>(i);
    return -1;
  }
};

}  // namespace rolex
