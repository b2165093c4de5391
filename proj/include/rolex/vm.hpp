#pragma once

#include <functional>
#include <memory>

#include "rolex/runtime.hpp"

namespace rolex {

struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class VmStatus { Running, CompletedOk, TerminatedGraceful, Crashed };

const char* vmStatusName(VmStatus s);

struct Value {
  ElementKind kind = ElementKind::I32;
  uint64_t raw = 0;

  static Value ofI32(int32_t v);
  static Value ofU32(uint32_t v);
  static Value ofF32(float v);
  static Value ofF64(double v);
  static Value ofPtr(uint64_t v);
  int32_t asI32() const;
  uint32_t asU32() const;
  float asF32() const;
  double asF64() const;
  uint64_t asPtr() const { return raw; }
};

// Test instrumentation hooks; all optional.
struct VmObserver {
  virtual ~VmObserver() = default;
  virtual void afterAction(const RecoveryAction&) {}
  virtual void afterCompareGroup(const std::string& ctxId) {}
  virtual void onCheckpoint(const std::string& blockId, int symbolId, Addr base,
                            uint64_t length) {
    (void)blockId; (void)symbolId; (void)base; (void)length;
  }
};

struct VmOptions {
  uint64_t layoutSeed = 0;
  uint64_t stepLimit = 50'000'000;
  std::vector<double> args;  // surfaced through the argnum() builtin
  VmObserver* observer = nullptr;
};

// Deterministic interpreter over the simulated address space. One instance
// is single-threaded; independent instances may run concurrently.
class Vm : public RuntimeHost {
 public:
  // Allocates all named state, populates the symbol map and registers the
  // profile's knowledge with the runtime. Throws LoadError when the profile
  // does not match the program.
  Vm(const Program& program, const ResilienceProfile& profile, VmOptions options = {});
  ~Vm() override;

  void step();                  // one statement-level step
  void run(uint64_t stepLimit); // until status != Running or the limit trips

  VmStatus status() const { return status_; }
  const std::string& crashReason() const { return crashReason_; }
  uint64_t stepCount() const { return stepCounter_; }
  const std::string& output() const { return output_; }
  int exitValue() const { return exitValue_; }

  AddressSpace& memory() { return memory_; }
  const AddressSpace& memory() const { return memory_; }
  RolexRuntime& runtime() { return *runtime_; }
  const RolexRuntime& runtime() const { return *runtime_; }
  NotificationChannel& notifications() { return channel_; }
  const NotificationChannel& notifications() const { return channel_; }
  const Program& program() const { return program_; }

  // Fault surface: flips one bit (or marks a code range) and, in detected
  // mode, queues the notification. Returns false for non-injectable sites.
  bool applyFault(Addr address, int bitIndex, bool detected,
                  std::string* hitConstruct = nullptr);

  // Resolves a construct id to its placement (for targeted injection).
  const SymbolPlacement* findConstruct(const std::string& constructId) const;

  // RuntimeHost
  AddressSpace& hostMemory() override { return memory_; }
  const Program& hostProgram() const override { return program_; }
  int runRecoveryFunction(int fnIndex) override;
  void terminateGracefully(const std::string& why) override;
  void crash(const std::string& reason) override;
  uint64_t currentStep() const override { return stepCounter_; }

 private:
  friend class RolexRuntime;
  struct Impl;
  void crashSoft(const std::string& reason);  // no unwinding
  std::unique_ptr<Impl> impl_;
  std::vector<double> args_;

  const Program& program_;
  AddressSpace memory_;
  NotificationChannel channel_;
  std::unique_ptr<RolexRuntime> runtime_;
  VmStatus status_ = VmStatus::Running;
  std::string crashReason_;
  uint64_t stepCounter_ = 0;
  uint64_t stepLimit_ = 0;
  std::string output_;
  int exitValue_ = 0;
  VmObserver* observer_ = nullptr;
};

}  // namespace rolex
