#include "rolex/ast.hpp"

namespace rolex {

BuiltinId builtinFromName(const std::string& n) {
  if (n == "malloc") return BuiltinId::Malloc;
  if (n == "free") return BuiltinId::Free;
  if (n == "rolex_malloc_tolerant") return BuiltinId::RolexMallocTolerant;
  if (n == "rolex_malloc_robust") return BuiltinId::RolexMallocRobust;
  if (n == "rolex_malloc_repairable") return BuiltinId::RolexMallocRepairable;
  if (n == "rolex_validate_robust") return BuiltinId::RolexValidateRobust;
  if (n == "rolex_ameliorate_heal") return BuiltinId::RolexAmeliorateHeal;
  if (n == "rolex_precision") return BuiltinId::RolexPrecisionCast;
  if (n == "argnum") return BuiltinId::ArgNum;
  if (n == "sqrt") return BuiltinId::Sqrt;
  if (n == "fabs") return BuiltinId::Fabs;
  if (n == "__rolex_initialize") return BuiltinId::RtlInitialize;
  if (n == "__rolex_finalize") return BuiltinId::RtlFinalize;
  if (n == "__rolex_preserve_state") return BuiltinId::RtlPreserveState;
  if (n == "__rolex_restore_state") return BuiltinId::RtlRestoreState;
  if (n == "__rolex_jmp_fwd") return BuiltinId::RtlJmpFwd;
  if (n == "__rolex_jmp_back") return BuiltinId::RtlJmpBack;
  if (n == "__rolex_create_checkpoint") return BuiltinId::RtlCreateCheckpoint;
  if (n == "__rolex_restore_checkpoint") return BuiltinId::RtlRestoreCheckpoint;
  if (n == "__rolex_copy") return BuiltinId::RtlCopy;
  if (n == "__rolex_register") return BuiltinId::RtlRegister;
  if (n == "__rolex_deregister") return BuiltinId::RtlDeregister;
  if (n == "__rolex_compare") return BuiltinId::RtlCompare;
  return BuiltinId::None;
}

const char* builtinName(BuiltinId id) {
  switch (id) {
    case BuiltinId::None: return "";
    case BuiltinId::Print: return "print";
    case BuiltinId::Malloc: return "malloc";
    case BuiltinId::Free: return "free";
    case BuiltinId::RolexMallocTolerant: return "rolex_malloc_tolerant";
    case BuiltinId::RolexMallocRobust: return "rolex_malloc_robust";
    case BuiltinId::RolexMallocRepairable: return "rolex_malloc_repairable";
    case BuiltinId::RolexValidateRobust: return "rolex_validate_robust";
    case BuiltinId::RolexAmeliorateHeal: return "rolex_ameliorate_heal";
    case BuiltinId::RolexPrecisionCast: return "rolex_precision";
    case BuiltinId::ArgNum: return "argnum";
    case BuiltinId::Sqrt: return "sqrt";
    case BuiltinId::Fabs: return "fabs";
    case BuiltinId::RtlInitialize: return "__rolex_initialize";
    case BuiltinId::RtlFinalize: return "__rolex_finalize";
    case BuiltinId::RtlPreserveState: return "__rolex_preserve_state";
    case BuiltinId::RtlRestoreState: return "__rolex_restore_state";
    case BuiltinId::RtlJmpFwd: return "__rolex_jmp_fwd";
    case BuiltinId::RtlJmpBack: return "__rolex_jmp_back";
    case BuiltinId::RtlCreateCheckpoint: return "__rolex_create_checkpoint";
    case BuiltinId::RtlRestoreCheckpoint: return "__rolex_restore_checkpoint";
    case BuiltinId::RtlCopy: return "__rolex_copy";
    case BuiltinId::RtlRegister: return "__rolex_register";
    case BuiltinId::RtlDeregister: return "__rolex_deregister";
    case BuiltinId::RtlCompare: return "__rolex_compare";
  }
  return "";
}

ExprPtr cloneExpr(const Expr& e) {
  auto c = std::make_unique<Expr>();
  c->kind = e.kind;
  c->pos = e.pos;
  c->intValue = e.intValue;
  c->floatValue = e.floatValue;
  c->text = e.text;
  if (e.lhs) c->lhs = cloneExpr(*e.lhs);
  if (e.rhs) c->rhs = cloneExpr(*e.rhs);
  for (const auto& a : e.args) c->args.push_back(cloneExpr(*a));
  c->sizeofType = e.sizeofType;
  c->symbolId = e.symbolId;
  c->calleeIndex = e.calleeIndex;
  c->builtin = e.builtin;
  c->type = e.type;
  c->heapElementKind = e.heapElementKind;
  return c;
}

static std::unique_ptr<Directive> cloneDirective(const Directive& d) {
  auto c = std::make_unique<Directive>();
  c->kind = d.kind;
  c->strength = d.strength;
  c->declareMode = d.declareMode;
  c->pos = d.pos;
  for (const auto& cl : d.clauses) {
    Clause cc;
    cc.kind = cl.kind;
    cc.pos = cl.pos;
    cc.vars = cl.vars;
    cc.function = cl.function;
    cc.defaultShared = cl.defaultShared;
    if (cl.fallbackValue) cc.fallbackValue = cloneExpr(*cl.fallbackValue);
    c->clauses.push_back(std::move(cc));
  }
  return c;
}

StmtPtr cloneStmt(const Stmt& s) {
  auto c = std::make_unique<Stmt>();
  c->kind = s.kind;
  c->pos = s.pos;
  c->synthetic = s.synthetic;
  c->decl.qualifier = s.decl.qualifier;
  c->decl.type = s.decl.type;
  c->decl.name = s.decl.name;
  c->decl.pos = s.decl.pos;
  c->decl.symbolId = s.decl.symbolId;
  if (s.decl.init) c->decl.init = cloneExpr(*s.decl.init);
  if (s.lhs) c->lhs = cloneExpr(*s.lhs);
  if (s.expr) c->expr = cloneExpr(*s.expr);
  for (const auto& a : s.args) c->args.push_back(cloneExpr(*a));
  if (s.init) c->init = cloneStmt(*s.init);
  if (s.incr) c->incr = cloneStmt(*s.incr);
  if (s.body) c->body = cloneStmt(*s.body);
  if (s.elseBody) c->elseBody = cloneStmt(*s.elseBody);
  for (const auto& st : s.stmts) c->stmts.push_back(cloneStmt(*st));
  if (s.directive) c->directive = cloneDirective(*s.directive);
  return c;
}

}  // namespace rolex
