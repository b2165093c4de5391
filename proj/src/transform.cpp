#include "rolex/transform.hpp"

#include <set>

#include "rolex/validate.hpp"
#include "rolex/vm.hpp"

namespace rolex {

namespace {

ExprPtr makeIdent(const std::string& name) {
  auto e = std::make_unique<Expr>();
  e->kind = Expr::Kind::Ident;
  e->text = name;
  return e;
}

ExprPtr makeString(const std::string& s) {
  auto e = std::make_unique<Expr>();
  e->kind = Expr::Kind::StringLit;
  e->text = s;
  return e;
}

ExprPtr makeAddressOf(ExprPtr inner) {
  auto e = std::make_unique<Expr>();
  e->kind = Expr::Kind::Unary;
  e->text = "&";
  e->lhs = std::move(inner);
  return e;
}

StmtPtr makeCallStmt(const std::string& fn, std::vector<ExprPtr> args) {
  auto call = std::make_unique<Expr>();
  call->kind = Expr::Kind::Call;
  call->text = fn;
  call->args = std::move(args);
  auto s = std::make_unique<Stmt>();
  s->kind = Stmt::Kind::ExprStmt;
  s->expr = std::move(call);
  s->synthetic = true;
  return s;
}

uint64_t countUnits(const Stmt& s) {
  uint64_t n = 1;
  if (s.init) n += countUnits(*s.init);
  if (s.incr) n += countUnits(*s.incr);
  if (s.body) n += countUnits(*s.body);
  if (s.elseBody) n += countUnits(*s.elseBody);
  for (const auto& st : s.stmts) n += countUnits(*st);
  return n;
}

void renameSymbol(Expr& e, int symbolId, const std::string& newName) {
  if (e.kind == Expr::Kind::Ident && e.symbolId == symbolId) {
    e.text = newName;
    e.symbolId = -1;
  }
  if (e.lhs) renameSymbol(*e.lhs, symbolId, newName);
  if (e.rhs) renameSymbol(*e.rhs, symbolId, newName);
  for (auto& a : e.args) renameSymbol(*a, symbolId, newName);
}

bool exprContainsCall(const Expr& e) {
  if (e.kind == Expr::Kind::Call) return true;
  if (e.lhs && exprContainsCall(*e.lhs)) return true;
  if (e.rhs && exprContainsCall(*e.rhs)) return true;
  for (const auto& a : e.args)
    if (exprContainsCall(*a)) return true;
  return false;
}

int rootSymbolOfLValue(const Expr& e) {
  if (e.kind == Expr::Kind::Ident) return e.symbolId;
  if (e.kind == Expr::Kind::Index) return rootSymbolOfLValue(*e.lhs);
  return -1;
}

void collectSymbolRefs(const Expr& e, std::set<int>& out) {
  if (e.kind == Expr::Kind::Ident && e.symbolId >= 0) out.insert(e.symbolId);
  if (e.lhs) collectSymbolRefs(*e.lhs, out);
  if (e.rhs) collectSymbolRefs(*e.rhs, out);
  for (const auto& a : e.args) collectSymbolRefs(*a, out);
}

void collectSymbolRefsStmt(const Stmt& s, std::set<int>& out) {
  if (s.lhs) collectSymbolRefs(*s.lhs, out);
  if (s.expr) collectSymbolRefs(*s.expr, out);
  if (s.decl.init) collectSymbolRefs(*s.decl.init, out);
  for (const auto& a : s.args) collectSymbolRefs(*a, out);
  if (s.init) collectSymbolRefsStmt(*s.init, out);
  if (s.incr) collectSymbolRefsStmt(*s.incr, out);
  if (s.body) collectSymbolRefsStmt(*s.body, out);
  if (s.elseBody) collectSymbolRefsStmt(*s.elseBody, out);
  for (const auto& st : s.stmts) collectSymbolRefsStmt(*st, out);
}

void collectLocalDecls(const Stmt& s, std::set<int>& out) {
  if (s.kind == Stmt::Kind::Decl) out.insert(s.decl.symbolId);
  if (s.init) collectLocalDecls(*s.init, out);
  if (s.incr) collectLocalDecls(*s.incr, out);
  if (s.body) collectLocalDecls(*s.body, out);
  if (s.elseBody) collectLocalDecls(*s.elseBody, out);
  for (const auto& st : s.stmts) collectLocalDecls(*st, out);
}

void collectWrites(const Stmt& s, std::set<int>& out) {
  if (s.kind == Stmt::Kind::Assign && s.lhs) {
    int root = rootSymbolOfLValue(*s.lhs);
    if (root >= 0) out.insert(root);
  }
  if (s.kind == Stmt::Kind::Decl && s.decl.init) out.insert(s.decl.symbolId);
  if (s.init) collectWrites(*s.init, out);
  if (s.incr) collectWrites(*s.incr, out);
  if (s.body) collectWrites(*s.body, out);
  if (s.elseBody) collectWrites(*s.elseBody, out);
  for (const auto& st : s.stmts) collectWrites(*st, out);
}

class Transformer {
 public:
  explicit Transformer(Program&& p) : prog_(std::move(p)) {}

  TransformResult run(bool stripOnly) {
    TransformResult out;
    if (!prog_.resolved) {
      error({}, "transform requires a validated program");
      out.diagnostics = std::move(diags_);
      return out;
    }
    if (!stripOnly) {
      replicateRobust();
      if (!hasErrors(diags_)) revalidate("replication");
      if (!hasErrors(diags_)) outlineAndDeclare();
      if (!hasErrors(diags_)) revalidate("outlining");
    } else {
      stripDirectives();
      if (!hasErrors(diags_)) revalidate("pragma strip");
    }
    if (!hasErrors(diags_)) emitProfile();
    out.program = std::move(prog_);
    out.profile = std::move(profile_);
    out.outlinedFunctions = std::move(outlined_);
    out.icvs = std::move(icvs_);
    out.diagnostics = std::move(diags_);
    return out;
  }

 private:
  void error(SourcePos pos, std::string msg) {
    Diagnostic d;
    d.kind = DiagKind::Transform;
    d.pos = pos;
    d.message = std::move(msg);
    diags_.push_back(std::move(d));
  }

  void revalidate(const char* phase) {
    auto ds = validate(prog_);
    for (auto& d : ds) {
      d.message = std::string("after ") + phase + ": " + d.message;
      diags_.push_back(std::move(d));
    }
  }

  bool nameTaken(const std::string& n) const {
    for (const auto& g : prog_.globals)
      if (g.name == n) return true;
    return prog_.findFunction(n) >= 0;
  }

  // ---------------------------------------------------------------- robust

  void replicateRobust() {
    // robust symbols and their replica names
    for (size_t i = 0; i < prog_.symbols.size(); i++) {
      const SymbolInfo& s = prog_.symbols[i];
      if (s.qualifier.kind != Qualifier::Kind::Robust) continue;
      if (s.scope == SymbolScope::Param) {
        error({}, "robust qualifier on parameter '" + s.name + "' is not replicable");
        continue;
      }
      int copies = strengthCopies(s.qualifier.strength);
      std::vector<std::string> names;
      for (int k = 1; k < copies; k++) names.push_back(s.name + "__r" + std::to_string(k));
      robust_[static_cast<int>(i)] = names;
    }
    if (robust_.empty()) return;

    // reject address-taken robust variables and robust loop-control writes
    for (auto& fn : prog_.functions)
      if (fn.body) scanRobustMisuse(*fn.body);
    if (hasErrors(diags_)) return;

    // global replicas, preserving source order
    std::vector<std::pair<bool, int>> newOrder;
    std::vector<VarDecl> newGlobals;
    for (auto& [isFn, idx] : prog_.order) {
      if (isFn) {
        newOrder.emplace_back(true, idx);
        continue;
      }
      VarDecl g = std::move(prog_.globals[static_cast<size_t>(idx)]);
      int sym = g.symbolId;
      newGlobals.push_back(std::move(g));
      newOrder.emplace_back(false, static_cast<int>(newGlobals.size() - 1));
      auto it = robust_.find(sym);
      if (it == robust_.end()) continue;
      for (const auto& rn : it->second) {
        if (nameTaken(rn)) error(newGlobals.back().pos, "replica name collides: " + rn);
        VarDecl rep;
        rep.type = newGlobals.back().type;
        rep.name = rn;
        rep.pos = newGlobals.back().pos;
        if (newGlobals.back().init) rep.init = cloneExpr(*newGlobals.back().init);
        newGlobals.push_back(std::move(rep));
        newOrder.emplace_back(false, static_cast<int>(newGlobals.size() - 1));
      }
    }
    prog_.globals = std::move(newGlobals);
    prog_.order = std::move(newOrder);

    for (auto& fn : prog_.functions)
      if (fn.body) replicateInList(fn.body->stmts);
  }

  void scanRobustMisuse(const Stmt& s) {
    auto checkExpr = [&](const Expr& e, auto&& self) -> void {
      if (e.kind == Expr::Kind::Unary && e.text == "&" && e.lhs) {
        int root = rootSymbolOfLValue(*e.lhs);
        if (root >= 0 && robust_.count(root))
          error(e.pos, "address of robust variable '" + prog_.symbols[root].name +
                           "' would break replication");
      }
      if (e.lhs) self(*e.lhs, self);
      if (e.rhs) self(*e.rhs, self);
      for (const auto& a : e.args) self(*a, self);
    };
    if (s.lhs) checkExpr(*s.lhs, checkExpr);
    if (s.expr) checkExpr(*s.expr, checkExpr);
    if (s.decl.init) checkExpr(*s.decl.init, checkExpr);
    for (const auto& a : s.args) checkExpr(*a, checkExpr);
    if (s.kind == Stmt::Kind::For) {
      for (const Stmt* sub : {s.init.get(), s.incr.get()}) {
        if (sub && sub->kind == Stmt::Kind::Assign && sub->lhs) {
          int root = rootSymbolOfLValue(*sub->lhs);
          if (root >= 0 && robust_.count(root))
            error(sub->pos, "robust variable '" + prog_.symbols[root].name +
                                "' cannot drive for-loop control");
        }
      }
    }
    if (s.init) scanRobustMisuse(*s.init);
    if (s.incr) scanRobustMisuse(*s.incr);
    if (s.body) scanRobustMisuse(*s.body);
    if (s.elseBody) scanRobustMisuse(*s.elseBody);
    for (const auto& st : s.stmts) scanRobustMisuse(*st);
  }

  void replicateInList(std::vector<StmtPtr>& list) {
    std::vector<StmtPtr> out;
    out.reserve(list.size());
    for (auto& sp : list) {
      Stmt& s = *sp;
      // recurse into nested structures first
      if (s.body && s.body->kind == Stmt::Kind::Block) replicateInList(s.body->stmts);
      else if (s.body) replicateWrapped(s.body);
      if (s.elseBody && s.elseBody->kind == Stmt::Kind::Block)
        replicateInList(s.elseBody->stmts);
      else if (s.elseBody) replicateWrapped(s.elseBody);
      if (s.kind == Stmt::Kind::Block) replicateInList(s.stmts);

      if (s.kind == Stmt::Kind::Decl && robust_.count(s.decl.symbolId)) {
        int sym = s.decl.symbolId;
        const auto& names = robust_[sym];
        bool hadInit = s.decl.init != nullptr;
        bool initHasCall = hadInit && exprContainsCall(*s.decl.init);
        std::string origName = s.decl.name;
        out.push_back(std::move(sp));
        for (const auto& rn : names) {
          auto rd = std::make_unique<Stmt>();
          rd->kind = Stmt::Kind::Decl;
          rd->synthetic = true;
          rd->decl.type = out.back()->decl.type;
          rd->decl.name = rn;
          if (hadInit) {
            if (initHasCall) {
              rd->decl.init = makeIdent(origName);
            } else {
              rd->decl.init = cloneExpr(*out.back()->decl.init);
              renameSymbol(*rd->decl.init, sym, rn);
            }
          }
          out.push_back(std::move(rd));
        }
        if (hadInit) out.push_back(makeCompare(sym, makeIdent(origName), names));
        continue;
      }

      if (s.kind == Stmt::Kind::Assign && s.lhs) {
        int root = rootSymbolOfLValue(*s.lhs);
        auto it = root >= 0 ? robust_.find(root) : robust_.end();
        if (it != robust_.end()) {
          int sym = root;
          const auto& names = it->second;
          bool rhsHasCall = exprContainsCall(*s.expr);
          ExprPtr lhsOrig = cloneExpr(*s.lhs);
          std::vector<StmtPtr> group;
          group.push_back(std::move(sp));
          for (const auto& rn : names) {
            auto rs = std::make_unique<Stmt>();
            rs->kind = Stmt::Kind::Assign;
            rs->synthetic = true;
            rs->lhs = cloneExpr(*lhsOrig);
            renameSymbol(*rs->lhs, sym, rn);
            if (rhsHasCall) {
              // calls are not re-executed; replicas alias the first result
              rs->expr = cloneExpr(*lhsOrig);
            } else {
              rs->expr = cloneExpr(*group[0]->expr);
              renameSymbol(*rs->expr, sym, rn);
            }
            group.push_back(std::move(rs));
          }
          group.push_back(makeCompare(sym, std::move(lhsOrig), names));
          for (auto& g : group) out.push_back(std::move(g));
          continue;
        }
      }
      out.push_back(std::move(sp));
    }
    list = std::move(out);
  }

  void replicateWrapped(StmtPtr& single) {
    // non-block body containing a robust write gets a block wrapper so the
    // replica group has a statement list to live in
    std::set<int> writes;
    collectWrites(*single, writes);
    bool needs = false;
    for (int w : writes)
      if (robust_.count(w)) needs = true;
    if (!needs) return;
    auto block = std::make_unique<Stmt>();
    block->kind = Stmt::Kind::Block;
    block->pos = single->pos;
    block->stmts.push_back(std::move(single));
    replicateInList(block->stmts);
    single = std::move(block);
  }

  StmtPtr makeCompare(int symbolId, ExprPtr location, const std::vector<std::string>& names) {
    std::vector<ExprPtr> args;
    args.push_back(makeString("var:" + prog_.symbols[static_cast<size_t>(symbolId)].constructId));
    args.push_back(cloneExpr(*location));
    for (const auto& rn : names) {
      ExprPtr replica = cloneExpr(*location);
      renameSymbol(*replica, symbolId, rn);
      args.push_back(std::move(replica));
    }
    return makeCallStmt("__rolex_compare", std::move(args));
  }

  // ------------------------------------------------------------ directives

  void outlineAndDeclare() {
    size_t fnCount = prog_.functions.size();
    for (size_t fi = 0; fi < fnCount; fi++) {
      if (!prog_.functions[fi].body) continue;
      outlineInList(prog_.functions[fi].body->stmts, static_cast<int>(fi));
      if (hasErrors(diags_)) return;
    }
    revalidate("block outlining");
    if (hasErrors(diags_)) return;

    // declare-resilient wrappers
    size_t count = prog_.functions.size();
    for (size_t fi = 0; fi < count; fi++) {
      if (!prog_.functions[fi].declareDirective) continue;
      buildDeclareWrapper(static_cast<int>(fi));
      if (hasErrors(diags_)) return;
    }
  }

  void outlineInList(std::vector<StmtPtr>& list, int hostFn) {
    for (auto& sp : list) {
      Stmt& s = *sp;
      if (s.kind == Stmt::Kind::Directive) {
        sp = outlineDirective(std::move(sp), hostFn);
        if (hasErrors(diags_)) return;
        continue;
      }
      if (s.init) outlineSingle(s.init, hostFn);
      if (s.incr) outlineSingle(s.incr, hostFn);
      if (s.body) outlineSingle(s.body, hostFn);
      if (s.elseBody) outlineSingle(s.elseBody, hostFn);
      if (s.kind == Stmt::Kind::Block) outlineInList(s.stmts, hostFn);
    }
  }

  void outlineSingle(StmtPtr& sp, int hostFn) {
    if (sp->kind == Stmt::Kind::Directive) {
      sp = outlineDirective(std::move(sp), hostFn);
      return;
    }
    if (sp->kind == Stmt::Kind::Block) {
      outlineInList(sp->stmts, hostFn);
      return;
    }
    if (sp->init) outlineSingle(sp->init, hostFn);
    if (sp->incr) outlineSingle(sp->incr, hostFn);
    if (sp->body) outlineSingle(sp->body, hostFn);
    if (sp->elseBody) outlineSingle(sp->elseBody, hostFn);
  }

  StmtPtr outlineDirective(StmtPtr dirStmt, int hostFn) {
    Directive& dir = *dirStmt->directive;
    const std::string& hostName = prog_.functions[static_cast<size_t>(hostFn)].name;
    int ordinal = blockCounter_++;
    std::string blockId = "blk:" + hostName + ":" + std::to_string(ordinal);
    std::string fnName = "__rolex_blk_" + std::to_string(ordinal);

    // capture set: all referenced non-global symbols, plus listed
    // private/compare variables (replicated per redundant instance)
    std::set<int> refs;
    collectSymbolRefsStmt(*dirStmt->body, refs);
    std::set<int> bodyLocals;
    collectLocalDecls(*dirStmt->body, bodyLocals);
    std::vector<int> captures;
    std::set<int> replicated;  // private + compare lists (robust directive)
    auto addClauseSyms = [&](Clause::Kind k, std::set<int>& into) {
      for (const auto& c : dir.clauses)
        if (c.kind == k)
          for (int s : c.varSymbols)
            if (s >= 0) into.insert(s);
    };
    std::set<int> shareSet, privateSet, compareSet, reinitSet;
    addClauseSyms(Clause::Kind::Share, shareSet);
    addClauseSyms(Clause::Kind::Private, privateSet);
    addClauseSyms(Clause::Kind::Compare, compareSet);
    addClauseSyms(Clause::Kind::Reinitialize, reinitSet);
    if (dir.kind == Directive::Kind::Robust) {
      replicated.insert(privateSet.begin(), privateSet.end());
      replicated.insert(compareSet.begin(), compareSet.end());
    }
    for (int sym : refs) {
      const SymbolInfo& si = prog_.symbols[static_cast<size_t>(sym)];
      if (bodyLocals.count(sym)) continue;
      if (si.scope == SymbolScope::Global && !replicated.count(sym)) continue;
      captures.push_back(sym);
    }
    for (int sym : replicated)
      if (std::find(captures.begin(), captures.end(), sym) == captures.end())
        captures.push_back(sym);
    std::sort(captures.begin(), captures.end());

    // shared-write discipline under redundant execution
    if (dir.kind == Directive::Kind::Robust) {
      std::set<int> writes;
      collectWrites(*dirStmt->body, writes);
      for (int w : writes) {
        if (bodyLocals.count(w) || replicated.count(w)) continue;
        error(dir.pos, "redundant block writes shared variable '" +
                           prog_.symbols[static_cast<size_t>(w)].name +
                           "'; list it in private or compare");
      }
      if (hasErrors(diags_)) return dirStmt;
    }

    // outlined function
    FunctionDecl fn;
    fn.name = fnName;
    fn.returnType.scalar = Scalar::Void;
    fn.pos = dir.pos;
    std::map<int, std::string> scalarParam;  // symbol -> parameter name (deref form)
    for (int sym : captures) {
      const SymbolInfo& si = prog_.symbols[static_cast<size_t>(sym)];
      if (si.type.arrayDims.size() == 2) {
        error(dir.pos, "cannot capture 2-D array '" + si.name + "'; make it global");
        return dirStmt;
      }
      if (si.type.isPointer()) {
        error(dir.pos, "cannot capture pointer variable '" + si.name + "'; make it global");
        return dirStmt;
      }
      VarDecl p;
      p.name = si.type.isArray() ? si.name : "__p_" + si.name;
      p.type.scalar = si.type.scalar;
      p.type.pointerDepth = si.type.isArray() ? 1 : 1;
      p.pos = dir.pos;
      if (!si.type.isArray()) scalarParam[sym] = p.name;
      fn.params.push_back(std::move(p));
    }
    fn.body = std::move(dirStmt->body);
    if (fn.body->kind != Stmt::Kind::Block) {
      auto blk = std::make_unique<Stmt>();
      blk->kind = Stmt::Kind::Block;
      blk->stmts.push_back(std::move(fn.body));
      fn.body = std::move(blk);
    }
    for (auto& [sym, pname] : scalarParam) rewriteDeref(*fn.body, sym, pname);

    // bracket
    auto bracket = std::make_unique<Stmt>();
    bracket->kind = Stmt::Kind::Block;
    bracket->synthetic = true;
    bracket->pos = dir.pos;
    int copies = dir.kind == Directive::Kind::Robust ? strengthCopies(dir.strength) : 1;
    std::map<int, std::vector<std::string>> blockReplicas;
    if (copies > 1) {
      for (int sym : replicated) {
        const SymbolInfo& si = prog_.symbols[static_cast<size_t>(sym)];
        std::vector<std::string> names;
        for (int k = 1; k < copies; k++) {
          std::string rn = si.name + "__b" + std::to_string(ordinal) + "r" + std::to_string(k);
          auto rd = std::make_unique<Stmt>();
          rd->kind = Stmt::Kind::Decl;
          rd->synthetic = true;
          rd->decl.type = si.type;
          rd->decl.name = rn;
          rd->decl.pos = dir.pos;
          bracket->stmts.push_back(std::move(rd));
          names.push_back(rn);
        }
        blockReplicas[sym] = std::move(names);
      }
    }
    {
      std::vector<ExprPtr> a;
      a.push_back(makeString(blockId));
      bracket->stmts.push_back(makeCallStmt("__rolex_register", std::move(a)));
    }
    {
      std::vector<ExprPtr> a;
      a.push_back(makeString(blockId));
      bracket->stmts.push_back(makeCallStmt("__rolex_preserve_state", std::move(a)));
    }
    // seed instance replicas with the originals' current contents
    for (auto& [sym, names] : blockReplicas) {
      const SymbolInfo& si = prog_.symbols[static_cast<size_t>(sym)];
      for (const auto& rn : names) {
        std::vector<ExprPtr> a;
        a.push_back(makeIdent(si.name));
        a.push_back(makeIdent(rn));
        bracket->stmts.push_back(makeCallStmt("__rolex_copy", std::move(a)));
      }
    }
    for (int inst = 0; inst < copies; inst++) {
      std::vector<ExprPtr> args;
      for (int sym : captures) {
        const SymbolInfo& si = prog_.symbols[static_cast<size_t>(sym)];
        std::string name = si.name;
        if (inst > 0 && blockReplicas.count(sym))
          name = blockReplicas[sym][static_cast<size_t>(inst - 1)];
        if (si.type.isArray())
          args.push_back(makeIdent(name));
        else
          args.push_back(makeAddressOf(makeIdent(name)));
      }
      bracket->stmts.push_back(makeCallStmt(fnName, std::move(args)));
    }
    if (copies > 1) {
      for (int sym : compareSet) {
        std::vector<ExprPtr> a;
        a.push_back(makeString(blockId));
        a.push_back(makeIdent(prog_.symbols[static_cast<size_t>(sym)].name));
        for (const auto& rn : blockReplicas[sym]) a.push_back(makeIdent(rn));
        bracket->stmts.push_back(makeCallStmt("__rolex_compare", std::move(a)));
      }
    }
    {
      std::vector<ExprPtr> a;
      a.push_back(makeString(blockId));
      bracket->stmts.push_back(makeCallStmt("__rolex_deregister", std::move(a)));
    }

    // profile record
    ProfileRecord rec;
    rec.kind = ProfileKind::Block;
    rec.constructId = blockId;
    rec.elementKind = ElementKind::None;
    rec.outlinedFn = fnName;
    rec.hostFn = hostName;
    rec.codeBytes = 16 * countUnits(*fn.body);
    switch (dir.kind) {
      case Directive::Kind::RecoverRollback: rec.policy = BlockPolicy::Rollback; break;
      case Directive::Kind::RecoverRollforward: rec.policy = BlockPolicy::Rollforward; break;
      case Directive::Kind::Robust:
        rec.policy = BlockPolicy::RobustBlock;
        rec.strength = dir.strength;
        break;
      case Directive::Kind::DeclareResilient: break;
    }
    auto ids = [&](const std::set<int>& syms) {
      std::vector<std::string> v;
      for (int s : syms) v.push_back(prog_.symbols[static_cast<size_t>(s)].constructId);
      return v;
    };
    rec.shareVars = ids(shareSet);
    rec.privateVars = ids(privateSet);
    rec.reinitializeVars = ids(reinitSet);
    rec.compareVars = ids(compareSet);
    for (const auto& c : dir.clauses) {
      if (c.kind == Clause::Kind::Ameliorate) rec.recoveryFn = c.function;
      if (c.kind == Clause::Kind::Default) {
        rec.hasDefaultClause = true;
        rec.defaultShared = c.defaultShared;
      }
    }
    blockRecords_.push_back(std::move(rec));
    outlined_[blockId] = fnName;
    icvs_.push_back("icv:" + blockId);
    prog_.functions.push_back(std::move(fn));
    prog_.order.emplace_back(true, static_cast<int>(prog_.functions.size() - 1));
    return bracket;
  }

  void rewriteDeref(Stmt& s, int symbolId, const std::string& paramName) {
    auto fix = [&](ExprPtr& e, auto&& self) -> void {
      if (!e) return;
      if (e->kind == Expr::Kind::Ident && e->symbolId == symbolId) {
        auto star = std::make_unique<Expr>();
        star->kind = Expr::Kind::Unary;
        star->text = "*";
        star->pos = e->pos;
        star->lhs = makeIdent(paramName);
        e = std::move(star);
        return;
      }
      if (e->lhs) self(e->lhs, self);
      if (e->rhs) self(e->rhs, self);
      for (auto& a : e->args) self(a, self);
    };
    fix(s.lhs, fix);
    fix(s.expr, fix);
    if (s.decl.init) fix(s.decl.init, fix);
    for (auto& a : s.args) fix(a, fix);
    if (s.init) rewriteDeref(*s.init, symbolId, paramName);
    if (s.incr) rewriteDeref(*s.incr, symbolId, paramName);
    if (s.body) rewriteDeref(*s.body, symbolId, paramName);
    if (s.elseBody) rewriteDeref(*s.elseBody, symbolId, paramName);
    for (auto& st : s.stmts) rewriteDeref(*st, symbolId, paramName);
  }

  void buildDeclareWrapper(int fi) {
    FunctionDecl& target = prog_.functions[static_cast<size_t>(fi)];
    std::unique_ptr<Directive> dir = std::move(target.declareDirective);
    target.declareDirective = nullptr;
    std::string wrapperName = "__rolex_fn_" + target.name;
    std::string ctxId = "declfn:" + target.name;
    if (nameTaken(wrapperName)) {
      error(dir->pos, "wrapper name collides: " + wrapperName);
      return;
    }
    bool isVoid = target.returnType.isVoid();
    int copies = dir->declareMode == Directive::DeclareMode::Robust
                     ? strengthCopies(dir->strength)
                     : 1;

    FunctionDecl w;
    w.name = wrapperName;
    w.returnType = target.returnType;
    w.pos = dir->pos;
    for (const auto& p : target.params) {
      VarDecl np;
      np.name = p.name;
      np.type = p.type;
      np.pos = p.pos;
      w.params.push_back(std::move(np));
    }
    auto body = std::make_unique<Stmt>();
    body->kind = Stmt::Kind::Block;

    std::vector<std::string> retNames;
    if (!isVoid) {
      for (int k = 0; k < copies; k++) {
        std::string rn = k == 0 ? "__ret" : "__ret__r" + std::to_string(k);
        auto d = std::make_unique<Stmt>();
        d->kind = Stmt::Kind::Decl;
        d->synthetic = true;
        d->decl.type = target.returnType;
        d->decl.name = rn;
        body->stmts.push_back(std::move(d));
        retNames.push_back(rn);
      }
    }
    {
      std::vector<ExprPtr> a;
      a.push_back(makeString(ctxId));
      body->stmts.push_back(makeCallStmt("__rolex_register", std::move(a)));
    }
    for (int k = 0; k < copies; k++) {
      auto call = std::make_unique<Expr>();
      call->kind = Expr::Kind::Call;
      call->text = target.name;
      for (const auto& p : w.params) call->args.push_back(makeIdent(p.name));
      if (isVoid) {
        auto st = std::make_unique<Stmt>();
        st->kind = Stmt::Kind::ExprStmt;
        st->synthetic = true;
        st->expr = std::move(call);
        body->stmts.push_back(std::move(st));
      } else {
        auto st = std::make_unique<Stmt>();
        st->kind = Stmt::Kind::Assign;
        st->synthetic = true;
        st->lhs = makeIdent(retNames[static_cast<size_t>(k)]);
        st->expr = std::move(call);
        body->stmts.push_back(std::move(st));
      }
    }
    if (copies > 1 && !isVoid) {
      std::vector<ExprPtr> a;
      a.push_back(makeString(ctxId));
      for (const auto& rn : retNames) a.push_back(makeIdent(rn));
      body->stmts.push_back(makeCallStmt("__rolex_compare", std::move(a)));
    }
    {
      std::vector<ExprPtr> a;
      a.push_back(makeString(ctxId));
      body->stmts.push_back(makeCallStmt("__rolex_deregister", std::move(a)));
    }
    {
      auto ret = std::make_unique<Stmt>();
      ret->kind = Stmt::Kind::Return;
      ret->synthetic = true;
      if (!isVoid) ret->expr = makeIdent("__ret");
      body->stmts.push_back(std::move(ret));
    }
    w.body = std::move(body);

    // reroute every call site outside the wrapper and the target
    for (size_t oi = 0; oi < prog_.functions.size(); oi++) {
      if (static_cast<int>(oi) == fi) continue;
      if (prog_.functions[oi].body)
        rerouteCalls(*prog_.functions[oi].body, fi, wrapperName);
    }

    ProfileRecord rec;
    rec.kind = ProfileKind::Block;
    rec.constructId = ctxId;
    rec.elementKind = target.returnType.elementKind();
    rec.outlinedFn = target.name;
    rec.hostFn = wrapperName;
    rec.codeBytes = target.body ? 16 * countUnits(*target.body) : 16;
    switch (dir->declareMode) {
      case Directive::DeclareMode::Retry: rec.policy = BlockPolicy::Retry; break;
      case Directive::DeclareMode::Ignore: rec.policy = BlockPolicy::Ignore; break;
      case Directive::DeclareMode::Robust:
        rec.policy = BlockPolicy::RobustFn;
        rec.strength = dir->strength;
        break;
      case Directive::DeclareMode::None: break;
    }
    if (const Clause* fb = dir->findClause(Clause::Kind::Fallback)) {
      rec.hasFallback = true;
      if (fb->fallbackValue) {
        if (fb->fallbackValue->kind == Expr::Kind::Ident)
          rec.fallbackSymbol = fb->fallbackValue->text;
        else if (fb->fallbackValue->kind == Expr::Kind::FloatLit)
          rec.fallbackValue = fb->fallbackValue->floatValue;
        else
          rec.fallbackValue =
              static_cast<double>(static_cast<int64_t>(fb->fallbackValue->intValue));
      }
    }
    blockRecords_.push_back(std::move(rec));
    outlined_[ctxId] = wrapperName;
    icvs_.push_back("icv:" + ctxId);
    prog_.functions.push_back(std::move(w));
    prog_.order.emplace_back(true, static_cast<int>(prog_.functions.size() - 1));
  }

  void rerouteCalls(Stmt& s, int targetFn, const std::string& wrapperName) {
    auto fix = [&](Expr& e, auto&& self) -> void {
      if (e.kind == Expr::Kind::Call && e.calleeIndex == targetFn) {
        e.text = wrapperName;
        e.calleeIndex = -1;
      }
      if (e.lhs) self(*e.lhs, self);
      if (e.rhs) self(*e.rhs, self);
      for (auto& a : e.args) self(*a, self);
    };
    if (s.lhs) fix(*s.lhs, fix);
    if (s.expr) fix(*s.expr, fix);
    if (s.decl.init) fix(*s.decl.init, fix);
    for (auto& a : s.args) fix(*a, fix);
    if (s.init) rerouteCalls(*s.init, targetFn, wrapperName);
    if (s.incr) rerouteCalls(*s.incr, targetFn, wrapperName);
    if (s.body) rerouteCalls(*s.body, targetFn, wrapperName);
    if (s.elseBody) rerouteCalls(*s.elseBody, targetFn, wrapperName);
    for (auto& st : s.stmts) rerouteCalls(*st, targetFn, wrapperName);
  }

  // -------------------------------------------------------------- stripping

  void stripDirectives() {
    for (auto& fn : prog_.functions) {
      fn.declareDirective = nullptr;
      if (fn.body) stripInStmt(*fn.body);
    }
  }

  void stripInStmt(Stmt& s) {
    if (s.init) stripSingle(s.init);
    if (s.incr) stripSingle(s.incr);
    if (s.body) stripSingle(s.body);
    if (s.elseBody) stripSingle(s.elseBody);
    for (auto& st : s.stmts) stripSingle(st);
  }

  void stripSingle(StmtPtr& sp) {
    if (sp->kind == Stmt::Kind::Directive) {
      StmtPtr body = std::move(sp->body);
      sp = std::move(body);
    }
    stripInStmt(*sp);
  }

  // ---------------------------------------------------------------- profile

  void emitProfile() {
    // qualifier records in declaration order: globals, then locals per
    // function in source order
    auto emitVar = [&](const SymbolInfo& si, SourcePos pos) {
      const Qualifier& q = si.qualifier;
      if (!q.isRolex()) return;
      ProfileRecord r;
      r.constructId = si.constructId;
      r.elementKind = si.type.elementKind();
      switch (q.kind) {
        case Qualifier::Kind::Tolerant: {
          r.kind = ProfileKind::Tolerant;
          if (!q.limit) {
            r.fullElision = true;
            r.mask = deriveMask(r.elementKind, nullptr);
          } else {
            RolexPrecision p;
            p.value = q.limit->value;
            p.interpretation = q.limit->kind == ToleranceLimit::Kind::Maximus
                                   ? LimitInterpretation::MaxValue
                                   : LimitInterpretation::DecimalDigits;
            try {
              r.mask = deriveMask(r.elementKind, &p);
            } catch (const InvalidLimit& e) {
              error(pos, std::string("tolerance limit for '") + si.name + "': " + e.what());
              return;
            }
          }
          break;
        }
        case Qualifier::Kind::Robust: {
          r.kind = ProfileKind::Robust;
          r.strength = q.strength;
          int copies = strengthCopies(q.strength);
          for (int k = 1; k < copies; k++) {
            std::string rn = si.name + "__r" + std::to_string(k);
            std::string cid = si.scope == SymbolScope::Global
                                  ? rn
                                  : prog_.functions[static_cast<size_t>(si.functionIndex)].name +
                                        "::" + rn;
            r.replicaIds.push_back(cid);
          }
          break;
        }
        case Qualifier::Kind::Heal:
          r.kind = ProfileKind::Heal;
          r.recoveryFn = q.healFunction;
          break;
        case Qualifier::Kind::None:
          return;
      }
      profile_.records.push_back(std::move(r));
    };

    for (const auto& g : prog_.globals)
      if (g.symbolId >= 0) emitVar(prog_.symbols[static_cast<size_t>(g.symbolId)], g.pos);
    for (const auto& fn : prog_.functions) {
      if (!fn.body) continue;
      emitLocalRecords(*fn.body, emitVar);
    }
    // heap allocation sites
    for (size_t fi = 0; fi < prog_.functions.size(); fi++)
      if (prog_.functions[fi].body)
        emitHeapSites(*prog_.functions[fi].body, prog_.functions[fi].name);
    for (auto& r : blockRecords_) profile_.records.push_back(std::move(r));
    blockRecords_.clear();
  }

  template <typename F>
  void emitLocalRecords(const Stmt& s, F&& emitVar) {
    if (s.kind == Stmt::Kind::Decl && s.decl.symbolId >= 0)
      emitVar(prog_.symbols[static_cast<size_t>(s.decl.symbolId)], s.decl.pos);
    if (s.init) emitLocalRecords(*s.init, emitVar);
    if (s.incr) emitLocalRecords(*s.incr, emitVar);
    if (s.body) emitLocalRecords(*s.body, emitVar);
    if (s.elseBody) emitLocalRecords(*s.elseBody, emitVar);
    for (const auto& st : s.stmts) emitLocalRecords(*st, emitVar);
  }

  void emitHeapSites(const Stmt& s, const std::string& fnName) {
    auto scan = [&](const Expr& e, auto&& self) -> void {
      if (e.kind == Expr::Kind::Call) {
        ProfileRecord r;
        bool isSite = true;
        switch (e.builtin) {
          case BuiltinId::RolexMallocTolerant: {
            r.kind = ProfileKind::TolerantHeap;
            const Expr& lim = *e.args[1];
            if (lim.kind == Expr::Kind::NullLit) {
              r.fullElision = true;
              if (e.heapElementKind != ElementKind::None &&
                  e.heapElementKind != ElementKind::Ptr)
                r.mask = deriveMask(e.heapElementKind, nullptr);
            } else {
              RolexPrecision p;
              p.value = lim.args[0]->intValue;
              p.interpretation = (e.heapElementKind == ElementKind::F32 ||
                                  e.heapElementKind == ElementKind::F64)
                                     ? LimitInterpretation::DecimalDigits
                                     : LimitInterpretation::MaxValue;
              try {
                r.mask = deriveMask(e.heapElementKind, &p);
              } catch (const InvalidLimit& ex) {
                error(e.pos, std::string("tolerant allocation limit: ") + ex.what());
                return;
              }
            }
            break;
          }
          case BuiltinId::RolexMallocRobust:
            r.kind = ProfileKind::RobustHeap;
            r.strength = e.args[1]->intValue == 3 ? Strength::Correct : Strength::Detect;
            break;
          case BuiltinId::RolexMallocRepairable:
            r.kind = ProfileKind::RepairableHeap;
            r.recoveryFn = e.args[1]->text;
            break;
          default:
            isSite = false;
            break;
        }
        if (isSite) {
          r.constructId = "heap:" + fnName + ":" + std::to_string(heapSiteCounter_++);
          r.elementKind = e.heapElementKind;
          profile_.records.push_back(std::move(r));
        }
      }
      if (e.lhs) self(*e.lhs, self);
      if (e.rhs) self(*e.rhs, self);
      for (const auto& a : e.args) self(*a, self);
    };
    if (s.lhs) scan(*s.lhs, scan);
    if (s.expr) scan(*s.expr, scan);
    if (s.decl.init) scan(*s.decl.init, scan);
    for (const auto& a : s.args) scan(*a, scan);
    if (s.init) emitHeapSites(*s.init, fnName);
    if (s.incr) emitHeapSites(*s.incr, fnName);
    if (s.body) emitHeapSites(*s.body, fnName);
    if (s.elseBody) emitHeapSites(*s.elseBody, fnName);
    for (const auto& st : s.stmts) emitHeapSites(*st, fnName);
  }

  Program prog_;
  ResilienceProfile profile_;
  std::vector<ProfileRecord> blockRecords_;
  std::map<std::string, std::string> outlined_;
  std::vector<std::string> icvs_;
  std::vector<Diagnostic> diags_;
  std::map<int, std::vector<std::string>> robust_;
  int blockCounter_ = 0;
  int heapSiteCounter_ = 0;
};

}  // namespace

TransformResult transform(Program&& program) {
  return Transformer(std::move(program)).run(false);
}

TransformResult stripDirectivesOnly(Program&& program) {
  return Transformer(std::move(program)).run(true);
}

bool equivalenceCheck(const Program& original, const Program& transformed,
                      const ResilienceProfile& profile, const std::vector<double>& args,
                      uint64_t stepLimit, std::string* why) {
  ResilienceProfile empty;
  VmOptions opts;
  opts.args = args;
  opts.stepLimit = stepLimit;
  Vm a(original, empty, opts);
  a.run(stepLimit);
  Vm b(transformed, profile, opts);
  b.run(stepLimit);
  if (a.status() != b.status()) {
    if (why)
      *why = std::string("status diverged: ") + vmStatusName(a.status()) + " vs " +
             vmStatusName(b.status());
    return false;
  }
  if (a.exitValue() != b.exitValue()) {
    if (why) *why = "exit values diverged";
    return false;
  }
  if (a.output() != b.output()) {
    if (why) *why = "print streams diverged";
    return false;
  }
  return true;
}

}  // namespace rolex
