#include "rolex/runtime.hpp"

#include <algorithm>
#include <cstring>

#include "rolex/bulkops.hpp"

namespace rolex {

const char* recoveryActionName(RecoveryActionKind k) {
  switch (k) {
    case RecoveryActionKind::Elide: return "elide";
    case RecoveryActionKind::Coerce: return "coerce";
    case RecoveryActionKind::MaskReset: return "mask-reset";
    case RecoveryActionKind::VoteCorrect: return "vote-correct";
    case RecoveryActionKind::DetectReport: return "detect-report";
    case RecoveryActionKind::HealInvoke: return "heal-invoke";
    case RecoveryActionKind::Reinitialize: return "reinitialize";
    case RecoveryActionKind::Rollback: return "rollback";
    case RecoveryActionKind::Rollforward: return "rollforward";
    case RecoveryActionKind::Retry: return "retry";
    case RecoveryActionKind::IgnoreWithFallback: return "ignore-fallback";
    case RecoveryActionKind::GracefulTerminate: return "graceful-terminate";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// DRM

int DynamicResilienceMap::registerEntry(DrmEntry entry) {
  for (const auto& e : entries_) {
    if (e.ranges.empty()) continue;
    for (const auto& [b1, l1] : e.ranges)
      for (const auto& [b2, l2] : entry.ranges)
        if (b1 < b2 + l2 && b2 < b1 + l1)
          throw OverlapError("DRM ranges overlap: " + e.constructId + " and " +
                             entry.constructId);
  }
  entries_.push_back(std::move(entry));
  return static_cast<int>(entries_.size() - 1);
}

void DynamicResilienceMap::deregisterEntry(const std::string& constructId) {
  for (size_t i = 0; i < entries_.size(); i++) {
    if (entries_[i].constructId == constructId) {
      entries_.erase(entries_.begin() + static_cast<long>(i));
      return;
    }
  }
  throw UnknownConstruct("no DRM entry named " + constructId);
}

const DrmEntry* DynamicResilienceMap::lookup(Addr a) const {
  for (const auto& e : entries_)
    for (const auto& [b, l] : e.ranges)
      if (a >= b && a < b + l) return &e;
  return nullptr;
}

DrmEntry* DynamicResilienceMap::lookupMutable(Addr a) {
  return const_cast<DrmEntry*>(lookup(a));
}

const DrmEntry* DynamicResilienceMap::byId(const std::string& constructId) const {
  for (const auto& e : entries_)
    if (e.constructId == constructId) return &e;
  return nullptr;
}

bool DynamicResilienceMap::locate(const DrmEntry& e, Addr a, int& replica,
                                  uint64_t& offset) const {
  for (size_t i = 0; i < e.ranges.size(); i++) {
    if (a >= e.ranges[i].first && a < e.ranges[i].first + e.ranges[i].second) {
      replica = static_cast<int>(i);
      offset = a - e.ranges[i].first;
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// RolexRuntime

namespace {

int symbolByConstructId(const Program& p, const std::string& id) {
  for (size_t i = 0; i < p.symbols.size(); i++)
    if (p.symbols[i].constructId == id) return static_cast<int>(i);
  return -1;
}

}  // namespace

void RolexRuntime::initialize(const ResilienceProfile& profile) {
  const Program& prog = host_.hostProgram();
  AddressSpace& mem = host_.hostMemory();
  for (const auto& r : profile.records) {
    switch (r.kind) {
      case ProfileKind::Tolerant:
      case ProfileKind::Robust:
      case ProfileKind::Heal: {
        int sym = symbolByConstructId(prog, r.constructId);
        const SymbolPlacement* pl = sym >= 0 ? mem.placementOf(sym) : nullptr;
        if (!pl)
          throw UnknownConstruct("profile names unknown construct " + r.constructId);
        DrmEntry e;
        e.constructId = r.constructId;
        e.kind = r.kind;
        e.elementKind = r.elementKind;
        e.ranges.emplace_back(pl->base, pl->length);
        if (r.kind == ProfileKind::Tolerant) {
          e.fullElision = r.fullElision;
          if (r.mask) e.mask = *r.mask;
        } else if (r.kind == ProfileKind::Robust) {
          e.strength = r.strength;
          for (const auto& rep : r.replicaIds) {
            int rsym = symbolByConstructId(prog, rep);
            const SymbolPlacement* rpl = rsym >= 0 ? mem.placementOf(rsym) : nullptr;
            if (!rpl)
              throw UnknownConstruct("profile names unknown replica " + rep);
            e.ranges.emplace_back(rpl->base, rpl->length);
          }
          if (static_cast<int>(e.ranges.size()) != strengthCopies(r.strength))
            throw UnknownConstruct("replica count mismatch for " + r.constructId);
        } else {
          e.recoveryFnIndex = prog.findFunction(r.recoveryFn);
          if (e.recoveryFnIndex < 0)
            throw UnknownConstruct("unknown recovery function " + r.recoveryFn);
        }
        drm_.registerEntry(std::move(e));
        break;
      }
      case ProfileKind::Block: {
        BlockInfo b;
        b.record = r;
        b.targetFnIndex = prog.findFunction(r.outlinedFn);
        if (b.targetFnIndex < 0)
          throw UnknownConstruct("profile names unknown function " + r.outlinedFn);
        auto resolveList = [&](const std::vector<std::string>& ids, std::vector<int>& out) {
          for (const auto& id : ids) {
            int sym = symbolByConstructId(prog, id);
            if (sym < 0) throw UnknownConstruct("unknown clause variable " + id);
            out.push_back(sym);
          }
        };
        resolveList(r.shareVars, b.shareSyms);
        resolveList(r.privateVars, b.privateSyms);
        resolveList(r.reinitializeVars, b.reinitSyms);
        resolveList(r.compareVars, b.compareSyms);
        if (!r.recoveryFn.empty()) {
          b.ameliorateFnIndex = prog.findFunction(r.recoveryFn);
          if (b.ameliorateFnIndex < 0)
            throw UnknownConstruct("unknown ameliorate function " + r.recoveryFn);
        }
        if (!r.fallbackSymbol.empty()) {
          b.fallbackSymId = symbolByConstructId(prog, r.fallbackSymbol);
          if (b.fallbackSymId < 0)
            throw UnknownConstruct("unknown fallback symbol " + r.fallbackSymbol);
        }
        blockIndexById_[r.constructId] = static_cast<int>(blocks_.size());
        blocks_.push_back(std::move(b));
        break;
      }
      case ProfileKind::TolerantHeap:
      case ProfileKind::RobustHeap:
      case ProfileKind::RepairableHeap:
        // allocation-site records; runtime entries appear when the
        // allocation routines execute
        break;
    }
  }
}

void RolexRuntime::finalize() {
  auto& entries = const_cast<std::vector<DrmEntry>&>(drm_.entries());
  entries.erase(std::remove_if(entries.begin(), entries.end(),
                               [](const DrmEntry& e) { return e.dynamic; }),
                entries.end());
  contexts_.clear();
}

int RolexRuntime::blockIndexOf(const std::string& id) const {
  auto it = blockIndexById_.find(id);
  return it == blockIndexById_.end() ? -1 : it->second;
}

const ProfileRecord* RolexRuntime::profileRecord(const std::string& id) const {
  int bi = blockIndexOf(id);
  if (bi >= 0) return &blocks_[bi].record;
  return nullptr;
}

BlockContext* RolexRuntime::liveContextOf(int blockIndex) {
  for (auto it = contexts_.rbegin(); it != contexts_.rend(); ++it)
    if (it->blockIndex == blockIndex) return &*it;
  return nullptr;
}

BlockContext* RolexRuntime::contextById(const std::string& id) {
  int bi = blockIndexOf(id);
  return bi < 0 ? nullptr : liveContextOf(bi);
}

void RolexRuntime::enterBlock(const std::string& id, size_t frameIndex) {
  int bi = blockIndexOf(id);
  if (bi < 0) throw UnknownConstruct("unknown block " + id);
  BlockInfo& b = blocks_[bi];
  if (b.silentCorrupted) {
    host_.crash("corrupted-code");
    return;
  }
  BlockContext ctx;
  ctx.blockIndex = bi;
  ctx.frameIndex = frameIndex;
  if (b.pendingErroneous) {
    ctx.erroneous = true;
    b.pendingErroneous = false;
  }
  AddressSpace& mem = host_.hostMemory();
  auto addRanges = [&](const std::vector<int>& syms) {
    for (int s : syms)
      if (const SymbolPlacement* pl = mem.placementOf(s))
        ctx.clauseRanges.emplace_back(pl->base, pl->length);
  };
  addRanges(b.shareSyms);
  addRanges(b.privateSyms);
  addRanges(b.reinitSyms);
  addRanges(b.compareSyms);
  contexts_.push_back(std::move(ctx));
  (void)nextInstance_++;
}

bool RolexRuntime::exitBlock(const std::string& id) {
  int bi = blockIndexOf(id);
  if (bi < 0) throw UnknownConstruct("unknown block " + id);
  if (contexts_.empty() || contexts_.back().blockIndex != bi)
    throw UnknownConstruct("unbalanced block exit for " + id);
  BlockContext& ctx = contexts_.back();
  if (ctx.erroneous) {
    fireBlockRecovery(ctx, /*atExit=*/true);
    if (ctx.pendingRetry) return false;  // context re-armed; deregister reruns later
  }
  contexts_.pop_back();
  return true;
}

void RolexRuntime::rawCopyOut(Addr base, uint64_t len, std::vector<uint8_t>& bytes,
                              std::vector<uint8_t>& init) {
  AddressSpace& mem = host_.hostMemory();
  bytes.resize(len);
  init.resize(len);
  const uint8_t* b = mem.rawSpan(base, len);
  uint8_t* iv = mem.rawInitSpan(base, len);
  if (!b || !iv) throw MissingCheckpoint("checkpoint source is unmapped");
  std::memcpy(bytes.data(), b, len);
  std::memcpy(init.data(), iv, len);
}

void RolexRuntime::rawCopyIn(Addr base, const std::vector<uint8_t>& bytes,
                             const std::vector<uint8_t>& init) {
  AddressSpace& mem = host_.hostMemory();
  uint8_t* b = mem.rawSpan(base, bytes.size());
  uint8_t* iv = mem.rawInitSpan(base, init.size());
  if (!b || !iv) throw MissingCheckpoint("checkpoint target is unmapped");
  std::memcpy(b, bytes.data(), bytes.size());
  std::memcpy(iv, init.data(), init.size());
}

void RolexRuntime::createCheckpoint(const std::string& blockId, int symbolId) {
  BlockContext* ctx = contextById(blockId);
  if (!ctx) throw MissingCheckpoint("no live context for " + blockId);
  const SymbolPlacement* pl = host_.hostMemory().placementOf(symbolId);
  if (!pl) throw MissingCheckpoint("checkpoint variable has no storage");
  rawCopyOut(pl->base, pl->length, ctx->checkpoints[symbolId],
             ctx->checkpointInit[symbolId]);
}

void RolexRuntime::restoreCheckpoint(const std::string& blockId, int symbolId) {
  BlockContext* ctx = contextById(blockId);
  if (!ctx) throw MissingCheckpoint("no live context for " + blockId);
  auto it = ctx->checkpoints.find(symbolId);
  if (it == ctx->checkpoints.end())
    throw MissingCheckpoint("no checkpoint for symbol in " + blockId);
  const SymbolPlacement* pl = host_.hostMemory().placementOf(symbolId);
  rawCopyIn(pl->base, it->second, ctx->checkpointInit[symbolId]);
}

void RolexRuntime::preserveState(const std::string& blockId) {
  BlockContext* ctx = contextById(blockId);
  if (!ctx) throw MissingCheckpoint("no live context for " + blockId);
  const BlockInfo& b = blocks_[ctx->blockIndex];
  for (int s : b.shareSyms) createCheckpoint(blockId, s);
  for (int s : b.reinitSyms) createCheckpoint(blockId, s);
}

void RolexRuntime::restoreState(const std::string& blockId) {
  BlockContext* ctx = contextById(blockId);
  if (!ctx) throw MissingCheckpoint("no live context for " + blockId);
  const BlockInfo& b = blocks_[ctx->blockIndex];
  for (int s : b.shareSyms) restoreCheckpoint(blockId, s);
}

void RolexRuntime::jmpFwd(const std::string& blockId) {
  BlockContext* ctx = contextById(blockId);
  if (!ctx) throw UnknownConstruct("no live context for " + blockId);
  ctx->pendingSkip = true;
}

void RolexRuntime::jmpBack(const std::string& blockId) {
  BlockContext* ctx = contextById(blockId);
  if (!ctx) throw UnknownConstruct("no live context for " + blockId);
  ctx->pendingRetry = true;
}

void RolexRuntime::copyVar(int symbolId) {
  const SymbolPlacement* pl = host_.hostMemory().placementOf(symbolId);
  if (!pl) throw UnknownConstruct("copy source has no storage");
  auto& slot = ambientCopies_[symbolId];
  rawCopyOut(pl->base, pl->length, slot.first, slot.second);
}

void RolexRuntime::restoreCopy(int symbolId) {
  auto it = ambientCopies_.find(symbolId);
  if (it == ambientCopies_.end()) throw MissingCheckpoint("no runtime copy of symbol");
  const SymbolPlacement* pl = host_.hostMemory().placementOf(symbolId);
  rawCopyIn(pl->base, it->second.first, it->second.second);
}

bool RolexRuntime::onUserCall(int calleeFnIndex, const ControlAnchor& anchor) {
  for (auto it = contexts_.rbegin(); it != contexts_.rend(); ++it) {
    BlockContext& ctx = *it;
    if (blocks_[ctx.blockIndex].targetFnIndex != calleeFnIndex) continue;
    ctx.anchor = anchor;
    ctx.anchor.set = true;
    if (ctx.skipNextCall) {
      ctx.skipNextCall = false;
      if (ctx.applyFallback) applySkipFallback(ctx);
      return false;
    }
    return true;
  }
  return true;
}

void RolexRuntime::applySkipFallback(BlockContext& ctx) {
  ctx.applyFallback = false;
  if (!ctx.anchor.hasDest) return;
  const BlockInfo& b = blocks_[ctx.blockIndex];
  AddressSpace& mem = host_.hostMemory();
  int esz = elementSize(ctx.anchor.destKind);
  if (b.fallbackSymId >= 0) {
    const SymbolPlacement* pl = mem.placementOf(b.fallbackSymId);
    if (pl && static_cast<int>(pl->length) == esz) {
      uint8_t buf[8];
      if (mem.read(pl->base, buf, pl->length) == Access::Ok)
        mem.write(ctx.anchor.destAddr, buf, pl->length);
      return;
    }
  }
  double v = b.record.fallbackValue.value_or(0.0);
  uint8_t buf[8] = {0};
  switch (ctx.anchor.destKind) {
    case ElementKind::I32: {
      int32_t x = static_cast<int32_t>(v);
      std::memcpy(buf, &x, 4);
      break;
    }
    case ElementKind::U32: {
      uint32_t x = static_cast<uint32_t>(v);
      std::memcpy(buf, &x, 4);
      break;
    }
    case ElementKind::F32: {
      float x = static_cast<float>(v);
      std::memcpy(buf, &x, 4);
      break;
    }
    case ElementKind::F64:
      std::memcpy(buf, &v, 8);
      break;
    default:
      return;
  }
  mem.write(ctx.anchor.destAddr, buf, static_cast<uint64_t>(esz));
}

bool RolexRuntime::runAmeliorate(BlockContext& ctx) {
  const BlockInfo& b = blocks_[ctx.blockIndex];
  if (b.ameliorateFnIndex < 0) return true;
  inRecovery_ = true;
  int r = host_.runRecoveryFunction(b.ameliorateFnIndex);
  inRecovery_ = false;
  return r != 0;
}

void RolexRuntime::fireBlockRecovery(BlockContext& ctx, bool atExit) {
  BlockInfo& b = blocks_[ctx.blockIndex];
  ctx.erroneous = false;
  const std::string& id = b.record.constructId;
  switch (b.record.policy) {
    case BlockPolicy::Rollback:
    case BlockPolicy::Retry: {
      if (ctx.retryCount >= kRetryBudget) {
        RecoveryAction t;
        t.kind = RecoveryActionKind::GracefulTerminate;
        t.target = id;
        t.step = host_.currentStep();
        logAction(t);
        host_.terminateGracefully("retry budget exhausted for " + id);
        return;
      }
      ctx.retryCount++;
      if (b.record.policy == BlockPolicy::Rollback) {
        for (int s : b.reinitSyms) restoreCheckpoint(id, s);
        if (!runAmeliorate(ctx)) {
          RecoveryAction t;
          t.kind = RecoveryActionKind::GracefulTerminate;
          t.target = id;
          t.step = host_.currentStep();
          logAction(t);
          host_.terminateGracefully("recovery function failed for " + id);
          return;
        }
        restoreState(id);
      }
      ctx.pendingRetry = true;
      return;
    }
    case BlockPolicy::Rollforward: {
      for (int s : b.reinitSyms) restoreCheckpoint(id, s);
      if (!runAmeliorate(ctx)) {
        RecoveryAction t;
        t.kind = RecoveryActionKind::GracefulTerminate;
        t.target = id;
        t.step = host_.currentStep();
        logAction(t);
        host_.terminateGracefully("recovery function failed for " + id);
        return;
      }
      restoreState(id);
      if (!atExit) ctx.pendingSkip = true;
      return;
    }
    case BlockPolicy::Ignore: {
      if (atExit)
        applySkipFallback(ctx);
      else {
        ctx.pendingSkip = true;
        ctx.applyFallback = true;
      }
      return;
    }
    case BlockPolicy::RobustBlock:
    case BlockPolicy::RobustFn:
    case BlockPolicy::None:
      host_.terminateGracefully("no recovery for detected error in " + id);
      return;
  }
}

// ---------------------------------------------------------------------------
// decision tree

RecoveryAction RolexRuntime::decide(const ErrorNotification& n) const {
  RecoveryAction a;
  a.step = host_.currentStep();
  const AddressSpace& mem = const_cast<RuntimeHost&>(host_).hostMemory();

  // 1. active block context: code range or clause-listed variable
  for (auto it = contexts_.rbegin(); it != contexts_.rend(); ++it) {
    const BlockContext& ctx = *it;
    const BlockInfo& b = blocks_[ctx.blockIndex];
    bool inCode = n.address >= b.codeBase && n.address < b.codeBase + b.codeLength;
    bool inClause = false;
    for (const auto& [base, len] : ctx.clauseRanges)
      if (n.address >= base && n.address < base + len) {
        inClause = true;
        break;
      }
    switch (b.record.policy) {
      case BlockPolicy::Rollback:
        if (inCode || inClause) {
          a.kind = RecoveryActionKind::Rollback;
          a.target = b.record.constructId;
          return a;
        }
        break;
      case BlockPolicy::Rollforward:
        if (inCode || inClause) {
          a.kind = RecoveryActionKind::Rollforward;
          a.target = b.record.constructId;
          return a;
        }
        break;
      case BlockPolicy::Retry:
        if (inCode) {
          a.kind = RecoveryActionKind::Retry;
          a.target = b.record.constructId;
          return a;
        }
        break;
      case BlockPolicy::Ignore:
        if (inCode) {
          a.kind = RecoveryActionKind::IgnoreWithFallback;
          a.target = b.record.constructId;
          return a;
        }
        break;
      default:
        break;
    }
  }

  // code range of an inactive (or redundancy-policy) block
  if (const CodeRange* cr = mem.codeRangeAt(n.address)) {
    const BlockInfo& b = blocks_[cr->blockIndex];
    a.target = b.record.constructId;
    a.deferred = true;
    switch (b.record.policy) {
      case BlockPolicy::Rollback: a.kind = RecoveryActionKind::Rollback; return a;
      case BlockPolicy::Rollforward: a.kind = RecoveryActionKind::Rollforward; return a;
      case BlockPolicy::Retry: a.kind = RecoveryActionKind::Retry; return a;
      case BlockPolicy::Ignore: a.kind = RecoveryActionKind::IgnoreWithFallback; return a;
      default:
        // redundant execution detects divergence but cannot repair its own
        // instructions
        a.deferred = false;
        a.kind = RecoveryActionKind::GracefulTerminate;
        return a;
    }
  }

  // 2-4. per-construct policy from the DRM
  if (const DrmEntry* e = drm_.lookup(n.address)) {
    a.target = e->constructId;
    switch (e->kind) {
      case ProfileKind::Tolerant:
      case ProfileKind::TolerantHeap: {
        if (e->fullElision) {
          a.kind = RecoveryActionKind::Elide;
          return a;
        }
        int replica;
        uint64_t offset;
        drm_.locate(*e, n.address, replica, offset);
        int esz = elementSize(e->elementKind);
        int bitInElement = static_cast<int>(offset % static_cast<uint64_t>(esz)) * 8 +
                           n.bitIndex;
        if (isErrorElidable(e->mask, bitInElement)) {
          bool isFloat =
              e->elementKind == ElementKind::F32 || e->elementKind == ElementKind::F64;
          a.kind = isFloat ? RecoveryActionKind::Coerce : RecoveryActionKind::MaskReset;
        } else {
          a.kind = RecoveryActionKind::GracefulTerminate;
        }
        return a;
      }
      case ProfileKind::Robust:
      case ProfileKind::RobustHeap:
        a.kind = e->strength == Strength::Correct ? RecoveryActionKind::VoteCorrect
                                                  : RecoveryActionKind::DetectReport;
        return a;
      case ProfileKind::Heal:
      case ProfileKind::RepairableHeap:
        a.kind = RecoveryActionKind::HealInvoke;
        return a;
      default:
        break;
    }
  }

  // 5. no knowledge
  a.kind = RecoveryActionKind::GracefulTerminate;
  return a;
}

void RolexRuntime::applyAction(const ErrorNotification& n, RecoveryAction& a) {
  AddressSpace& mem = host_.hostMemory();
  switch (a.kind) {
    case RecoveryActionKind::Elide:
      return;
    case RecoveryActionKind::Coerce:
    case RecoveryActionKind::MaskReset: {
      DrmEntry* e = drm_.lookupMutable(n.address);
      if (!e) return;
      int replica;
      uint64_t offset;
      drm_.locate(*e, n.address, replica, offset);
      int esz = elementSize(e->elementKind);
      Addr elemBase = e->ranges[static_cast<size_t>(replica)].first +
                      (offset / static_cast<uint64_t>(esz)) * static_cast<uint64_t>(esz);
      uint64_t raw = 0;
      uint8_t* span = mem.rawSpan(elemBase, static_cast<uint64_t>(esz));
      if (!span) return;
      std::memcpy(&raw, span, static_cast<size_t>(esz));
      raw = applyCoercion(e->mask, raw);
      std::memcpy(span, &raw, static_cast<size_t>(esz));
      a.repaired = true;
      return;
    }
    case RecoveryActionKind::VoteCorrect: {
      DrmEntry* e = drm_.lookupMutable(n.address);
      if (!e) return;
      VoteOutcome v = voteAndRepair(*e);
      if (v == VoteOutcome::DetectedOnly) {
        RecoveryAction t;
        t.kind = RecoveryActionKind::GracefulTerminate;
        t.target = e->constructId;
        t.step = host_.currentStep();
        logAction(t);
        host_.terminateGracefully("vote could not resolve " + e->constructId);
        return;
      }
      a.repaired = v == VoteOutcome::Corrected;
      return;
    }
    case RecoveryActionKind::DetectReport:
      host_.terminateGracefully("detected error on DMR construct " + a.target);
      return;
    case RecoveryActionKind::HealInvoke: {
      DrmEntry* e = drm_.lookupMutable(n.address);
      if (!e) return;
      if (healInvoke(*e)) {
        a.repaired = true;
        return;
      }
      RecoveryAction t;
      t.kind = RecoveryActionKind::GracefulTerminate;
      t.target = e->constructId;
      t.step = host_.currentStep();
      logAction(t);
      host_.terminateGracefully("recovery function could not repair " + e->constructId);
      return;
    }
    case RecoveryActionKind::Rollback:
    case RecoveryActionKind::Rollforward:
    case RecoveryActionKind::Retry:
    case RecoveryActionKind::IgnoreWithFallback: {
      int bi = blockIndexOf(a.target);
      if (bi < 0) return;
      if (a.deferred) {
        blocks_[bi].pendingErroneous = true;
        return;
      }
      BlockContext* ctx = liveContextOf(bi);
      if (!ctx) {
        blocks_[bi].pendingErroneous = true;
        a.deferred = true;
        return;
      }
      fireBlockRecovery(*ctx, /*atExit=*/false);
      return;
    }
    case RecoveryActionKind::Reinitialize:
      return;
    case RecoveryActionKind::GracefulTerminate:
      host_.terminateGracefully("no error-management knowledge for the faulted site");
      return;
  }
}

void RolexRuntime::handleNotification(const ErrorNotification& n) {
  RecoveryAction a = decide(n);
  applyAction(n, a);
  logAction(a);
}

void RolexRuntime::logAction(const RecoveryAction& a) { actions_.push_back(a); }

// ---------------------------------------------------------------------------
// replica management

VoteOutcome RolexRuntime::voteAndRepair(const DrmEntry& entry) {
  AddressSpace& mem = host_.hostMemory();
  uint64_t len = entry.length();
  if (entry.ranges.size() == 2) {
    const uint8_t* a = mem.rawSpan(entry.ranges[0].first, len);
    const uint8_t* b = mem.rawSpan(entry.ranges[1].first, len);
    if (!a || !b) return VoteOutcome::DetectedOnly;
    return bulk::equalBytes(a, b, len) ? VoteOutcome::Clean : VoteOutcome::DetectedOnly;
  }
  uint8_t* a = mem.rawSpan(entry.ranges[0].first, len);
  uint8_t* b = mem.rawSpan(entry.ranges[1].first, len);
  uint8_t* c = mem.rawSpan(entry.ranges[2].first, len);
  if (!a || !b || !c) return VoteOutcome::DetectedOnly;
  int esz = elementSize(entry.elementKind);
  bulk::VoteResult r = bulk::majorityVote3(a, b, c, len, esz);
  if (r.unresolvedElements > 0) return VoteOutcome::DetectedOnly;
  return r.repairedElements > 0 ? VoteOutcome::Corrected : VoteOutcome::Clean;
}

void RolexRuntime::compareGroup(const std::string& ctxId,
                                const std::vector<std::pair<Addr, uint64_t>>& spans,
                                ElementKind elem) {
  AddressSpace& mem = host_.hostMemory();
  const ProfileRecord* rec = nullptr;
  int bi = blockIndexOf(ctxId);
  if (bi >= 0)
    rec = &blocks_[bi].record;
  else
    for (const auto& e : drm_.entries())
      if (e.constructId == ctxId) break;
  uint64_t len = spans[0].second;

  if (spans.size() == 2) {
    const uint8_t* a = mem.rawSpan(spans[0].first, len);
    const uint8_t* b = mem.rawSpan(spans[1].first, len);
    if (!a || !b) {
      host_.crash("compare group spans unmapped memory");
      return;
    }
    if (bulk::equalBytes(a, b, len)) return;
    // detection without correction: fall back when the construct has one
    if (rec && rec->hasFallback) {
      BlockContext* ctx = bi >= 0 ? liveContextOf(bi) : nullptr;
      RecoveryAction act;
      act.kind = RecoveryActionKind::IgnoreWithFallback;
      act.target = ctxId;
      act.step = host_.currentStep();
      writeFallbackToSpans(spans, elem, bi);
      logAction(act);
      (void)ctx;
      return;
    }
    RecoveryAction act;
    act.kind = RecoveryActionKind::DetectReport;
    act.target = ctxId;
    act.step = host_.currentStep();
    logAction(act);
    host_.terminateGracefully("replica mismatch detected in " + ctxId);
    return;
  }

  uint8_t* a = mem.rawSpan(spans[0].first, len);
  uint8_t* b = mem.rawSpan(spans[1].first, len);
  uint8_t* c = mem.rawSpan(spans[2].first, len);
  if (!a || !b || !c) {
    host_.crash("compare group spans unmapped memory");
    return;
  }
  if (bulk::equalBytes(a, b, len) && bulk::equalBytes(a, c, len)) return;
  bulk::VoteResult r = bulk::majorityVote3(a, b, c, len, elementSize(elem));
  if (r.unresolvedElements == 0) {
    RecoveryAction act;
    act.kind = RecoveryActionKind::VoteCorrect;
    act.target = ctxId;
    act.step = host_.currentStep();
    act.repaired = true;
    logAction(act);
    return;
  }
  if (rec && rec->hasFallback) {
    RecoveryAction act;
    act.kind = RecoveryActionKind::IgnoreWithFallback;
    act.target = ctxId;
    act.step = host_.currentStep();
    writeFallbackToSpans(spans, elem, bi);
    logAction(act);
    return;
  }
  RecoveryAction act;
  act.kind = RecoveryActionKind::DetectReport;
  act.target = ctxId;
  act.step = host_.currentStep();
  logAction(act);
  host_.terminateGracefully("vote could not resolve replicas in " + ctxId);
}

void RolexRuntime::writeFallbackToSpans(const std::vector<std::pair<Addr, uint64_t>>& spans,
                                        ElementKind elem, int blockIndex) {
  double v = 0.0;
  if (blockIndex >= 0) v = blocks_[blockIndex].record.fallbackValue.value_or(0.0);
  uint8_t buf[8] = {0};
  int esz = elementSize(elem);
  switch (elem) {
    case ElementKind::I32: {
      int32_t x = static_cast<int32_t>(v);
      std::memcpy(buf, &x, 4);
      break;
    }
    case ElementKind::U32: {
      uint32_t x = static_cast<uint32_t>(v);
      std::memcpy(buf, &x, 4);
      break;
    }
    case ElementKind::F32: {
      float x = static_cast<float>(v);
      std::memcpy(buf, &x, 4);
      break;
    }
    default:
      std::memcpy(buf, &v, 8);
      break;
  }
  AddressSpace& mem = host_.hostMemory();
  for (const auto& [base, len] : spans)
    for (uint64_t off = 0; off + static_cast<uint64_t>(esz) <= len;
         off += static_cast<uint64_t>(esz))
      mem.write(base + off, buf, static_cast<uint64_t>(esz));
}

bool RolexRuntime::healInvoke(const DrmEntry& entry) {
  if (entry.recoveryFnIndex < 0) return false;
  inRecovery_ = true;
  int r = host_.runRecoveryFunction(entry.recoveryFnIndex);
  inRecovery_ = false;
  return r != 0;
}

void RolexRuntime::mirrorHeapWrite(Addr a, uint64_t n) {
  AddressSpace& mem = host_.hostMemory();
  for (const auto& e : drm_.entries()) {
    if (e.kind != ProfileKind::RobustHeap || e.ranges.empty()) continue;
    const auto& [base, len] = e.ranges[0];
    if (a >= base && a + n <= base + len) {
      uint64_t off = a - base;
      const uint8_t* src = mem.rawSpan(a, n);
      if (!src) return;
      for (size_t i = 1; i < e.ranges.size(); i++) {
        uint8_t* dst = mem.rawSpan(e.ranges[i].first + off, n);
        uint8_t* dstInit = mem.rawInitSpan(e.ranges[i].first + off, n);
        if (dst) {
          std::memcpy(dst, src, n);
          std::memset(dstInit, 1, n);
        }
      }
      return;
    }
  }
}

void RolexRuntime::noteSilentCodeFault(int codeBlockIndex) {
  if (codeBlockIndex < 0 || codeBlockIndex >= static_cast<int>(blocks_.size())) return;
  blocks_[codeBlockIndex].silentCorrupted = true;
  if (liveContextOf(codeBlockIndex) != nullptr) host_.crash("corrupted-code");
}

void RolexRuntime::dropContextsAboveFrame(size_t frameCount) {
  while (!contexts_.empty() && contexts_.back().frameIndex >= frameCount)
    contexts_.pop_back();
}

}  // namespace rolex
