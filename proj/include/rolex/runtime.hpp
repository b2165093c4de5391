#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rolex/address_space.hpp"
#include "rolex/ast.hpp"
#include "rolex/bitmask.hpp"
#include "rolex/profile.hpp"

namespace rolex {

struct OverlapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownConstruct : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingCheckpoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ErrorNotification {
  Addr address = 0;
  int bitIndex = 0;       // 0..7 within the byte
  bool detected = true;   // false entries are recorded but never delivered
  uint64_t step = 0;
};

class NotificationChannel {
 public:
  void push(const ErrorNotification& n) {
    if (n.detected)
      pending_.push_back(n);
    else
      silentLog_.push_back(n);
  }
  bool hasPending() const { return !pending_.empty(); }
  ErrorNotification pop() {
    ErrorNotification n = pending_.front();
    pending_.pop_front();
    return n;
  }
  uint64_t deliveredCount() const { return delivered_; }
  void noteDelivered() { delivered_++; }
  const std::vector<ErrorNotification>& silentLog() const { return silentLog_; }

 private:
  std::deque<ErrorNotification> pending_;
  std::vector<ErrorNotification> silentLog_;
  uint64_t delivered_ = 0;
};

// ---------------------------------------------------------------------------
// Dynamic Resilience Map

struct DrmEntry {
  std::string constructId;
  ProfileKind kind = ProfileKind::Tolerant;
  ElementKind elementKind = ElementKind::None;
  std::vector<std::pair<Addr, uint64_t>> ranges;  // robust entries: one per replica
  ToleranceMask mask;
  bool fullElision = false;
  Strength strength = Strength::None;
  int recoveryFnIndex = -1;
  bool dynamic = false;

  uint64_t length() const { return ranges.empty() ? 0 : ranges[0].second; }
};

class DynamicResilienceMap {
 public:
  // throws OverlapError when any range intersects an existing entry
  int registerEntry(DrmEntry entry);
  void deregisterEntry(const std::string& constructId);  // throws UnknownConstruct
  const DrmEntry* lookup(Addr a) const;                  // at most one entry
  DrmEntry* lookupMutable(Addr a);
  const DrmEntry* byId(const std::string& constructId) const;
  const std::vector<DrmEntry>& entries() const { return entries_; }
  // replica index and byte offset of an address inside an entry
  bool locate(const DrmEntry& e, Addr a, int& replica, uint64_t& offset) const;

 private:
  std::vector<DrmEntry> entries_;
};

// ---------------------------------------------------------------------------
// Decision tree

enum class RecoveryActionKind {
  Elide,
  Coerce,
  MaskReset,
  VoteCorrect,
  DetectReport,
  HealInvoke,
  Reinitialize,
  Rollback,
  Rollforward,
  Retry,
  IgnoreWithFallback,
  GracefulTerminate,
};

const char* recoveryActionName(RecoveryActionKind k);

struct RecoveryAction {
  RecoveryActionKind kind = RecoveryActionKind::GracefulTerminate;
  std::string target;
  uint64_t step = 0;
  bool deferred = false;  // code fault on a block with no live instance
  bool repaired = false;
};

enum class VoteOutcome { Clean, Corrected, DetectedOnly };

// ---------------------------------------------------------------------------
// Blocks and live block contexts

struct BlockInfo {
  ProfileRecord record;
  int targetFnIndex = -1;
  Addr codeBase = 0;
  uint64_t codeLength = 0;
  std::vector<int> shareSyms, privateSyms, reinitSyms, compareSyms;
  int ameliorateFnIndex = -1;
  int fallbackSymId = -1;
  bool pendingErroneous = false;  // detected code fault, no live instance
  bool silentCorrupted = false;   // silent code fault: next execution crashes
};

struct ControlAnchor {
  bool set = false;
  size_t frameIndex = 0;
  size_t controlIndex = 0;
  size_t stmtIndex = 0;  // index of the anchored call inside its Seq entry
  bool hasDest = false;
  Addr destAddr = 0;
  ElementKind destKind = ElementKind::None;
};

struct BlockContext {
  int blockIndex = -1;
  size_t frameIndex = 0;  // frame that executed __rolex_register
  ControlAnchor anchor;
  int retryCount = 0;
  bool erroneous = false;
  bool pendingRetry = false;
  bool pendingSkip = false;
  bool applyFallback = false;
  bool skipNextCall = false;
  std::map<int, std::vector<uint8_t>> checkpoints;      // symbolId -> raw bytes
  std::map<int, std::vector<uint8_t>> checkpointInit;   // matching init flags
  std::vector<std::pair<Addr, uint64_t>> clauseRanges;  // case-1 coverage
};

// Services the runtime needs from the interpreter.
class RuntimeHost {
 public:
  virtual ~RuntimeHost() = default;
  virtual AddressSpace& hostMemory() = 0;
  virtual const Program& hostProgram() const = 0;
  // Runs "int fn(void)" to completion inside the VM (steps count); returns
  // the function's value, or 0 if it crashed.
  virtual int runRecoveryFunction(int fnIndex) = 0;
  virtual void terminateGracefully(const std::string& why) = 0;
  virtual void crash(const std::string& reason) = 0;
  virtual uint64_t currentStep() const = 0;
};

// The runtime inference system: owns the DRM and the live block contexts,
// maps error notifications to recovery actions, and applies them.
class RolexRuntime {
 public:
  explicit RolexRuntime(RuntimeHost& host) : host_(host) {}

  // --- pre-execution: profile -> DRM + block table (RTL __rolex_initialize)
  void initialize(const ResilienceProfile& profile);
  void finalize();  // drops dynamic entries and live contexts

  // --- DRM (RTL __rolex_register / __rolex_deregister for data objects)
  void drmRegister(DrmEntry entry) { drm_.registerEntry(std::move(entry)); }
  void drmDeregister(const std::string& id) { drm_.deregisterEntry(id); }
  DynamicResilienceMap& drm() { return drm_; }
  const DynamicResilienceMap& drm() const { return drm_; }

  // --- block lifecycle (RTL __rolex_register / __rolex_deregister on block ids)
  bool isBlockId(const std::string& id) const { return blockIndexById_.count(id) != 0; }
  void enterBlock(const std::string& id, size_t frameIndex);
  // returns false when a deferred recovery re-arms the context (retry)
  bool exitBlock(const std::string& id);
  // --- state preservation (RTL __rolex_preserve_state / friends)
  void preserveState(const std::string& blockId);
  void restoreState(const std::string& blockId);
  void createCheckpoint(const std::string& blockId, int symbolId);
  void restoreCheckpoint(const std::string& blockId, int symbolId);
  void jmpFwd(const std::string& blockId);
  void jmpBack(const std::string& blockId);
  void copyVar(int symbolId);
  void restoreCopy(int symbolId);

  // anchor capture: called by the VM when a user call statement executes.
  // Returns false if this call must be skipped (roll-forward decided before
  // the call was reached).
  bool onUserCall(int calleeFnIndex, const ControlAnchor& anchor);

  // --- notifications
  void handleNotification(const ErrorNotification& n);
  RecoveryAction decide(const ErrorNotification& n) const;

  // --- replica management
  VoteOutcome voteAndRepair(const DrmEntry& entry);
  // __rolex_compare over explicit replica locations
  void compareGroup(const std::string& ctxId,
                    const std::vector<std::pair<Addr, uint64_t>>& spans,
                    ElementKind elem);
  // heal / rolex_ameliorate_heal; true = repaired
  bool healInvoke(const DrmEntry& entry);

  // --- injector interface
  void noteSilentCodeFault(int codeBlockIndex);
  bool inRecovery() const { return inRecovery_; }

  // --- inspection
  const std::vector<BlockInfo>& blocks() const { return blocks_; }
  std::vector<BlockInfo>& blocksMutable() { return blocks_; }
  void logExternal(const RecoveryAction& a) { logAction(a); }
  // raw write-through mirroring for robust heap blocks
  void mirrorHeapWrite(Addr a, uint64_t n);
  void applySkipFallback(BlockContext& ctx);
  std::vector<BlockContext>& contexts() { return contexts_; }
  const std::vector<RecoveryAction>& actionLog() const { return actions_; }
  void dropContextsAboveFrame(size_t frameCount);
  const ProfileRecord* profileRecord(const std::string& id) const;

  static constexpr int kRetryBudget = 3;

 private:
  BlockContext* liveContextOf(int blockIndex);
  BlockContext* contextById(const std::string& id);
  int blockIndexOf(const std::string& id) const;
  void fireBlockRecovery(BlockContext& ctx, bool atExit);
  void applyAction(const ErrorNotification& n, RecoveryAction& a);
  void logAction(const RecoveryAction& a);
  void rawCopyOut(Addr base, uint64_t len, std::vector<uint8_t>& bytes,
                  std::vector<uint8_t>& init);
  void rawCopyIn(Addr base, const std::vector<uint8_t>& bytes,
                 const std::vector<uint8_t>& init);
  bool runAmeliorate(BlockContext& ctx);
  void writeFallbackToSpans(const std::vector<std::pair<Addr, uint64_t>>& spans,
                            ElementKind elem, int blockIndex);

  RuntimeHost& host_;
  DynamicResilienceMap drm_;
  std::vector<BlockInfo> blocks_;
  std::map<std::string, int> blockIndexById_;
  std::vector<BlockContext> contexts_;  // innermost last
  std::map<int, std::pair<std::vector<uint8_t>, std::vector<uint8_t>>> ambientCopies_;
  std::vector<RecoveryAction> actions_;
  bool inRecovery_ = false;
  uint64_t nextInstance_ = 0;
};

}  // namespace rolex
