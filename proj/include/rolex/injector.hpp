#pragma once

#include <functional>

#include "rolex/vm.hpp"

namespace rolex {

enum class FaultMode { Detected, Silent };

const char* faultModeName(FaultMode m);

// Accelerated fault schedule. Rate form: one fault per interval of
// `intervalMinutes`, fired at the interval midpoint in VM steps
// (scaleStepsPerMinute steps stand for one minute), with uniformly random
// sites. Exact form: exactly `exactFaults` flips at sorted uniform step
// times within the golden run length. Single-shot form: one targeted flip.
struct FaultSchedule {
  FaultMode mode = FaultMode::Detected;
  uint64_t seed = 0;

  double intervalMinutes = 0.0;
  uint64_t scaleStepsPerMinute = 10000;

  int exactFaults = 0;
  uint64_t goldenSteps = 0;

  std::string targetConstruct;  // restrict sites to one construct's bytes

  bool singleShot = false;
  Addr address = 0;
  int bitIndex = 0;
  uint64_t atStep = 0;
};

struct FaultEvent {
  uint64_t stepTime = 0;
  Addr address = 0;
  int bitIndex = 0;
  FaultMode mode = FaultMode::Detected;
  std::string drmEntryHit;
};

enum class RunClass {
  CompletedCorrect,
  DetectedCorrected,
  Benign,
  SilentWrong,
  TerminatedGraceful,
  Crashed,
};

const char* runClassName(RunClass c);

struct RunOutcome {
  RunClass classification = RunClass::Crashed;
  VmStatus finalStatus = VmStatus::Crashed;
  std::string reason;
  std::vector<FaultEvent> faultEvents;
  uint64_t steps = 0;
  bool hasEfficiency = false;
  double efficiency = 0.0;
  uint64_t deliveredNotifications = 0;
  std::vector<RecoveryAction> actions;
};

struct CoverageStats {
  uint64_t total = 0;
  uint64_t tolerantElide = 0;
  uint64_t tolerantMasked = 0;
  uint64_t robust = 0;
  uint64_t healRepair = 0;
  uint64_t blockCode = 0;
  uint64_t unprotected() const {
    return total - tolerantElide - tolerantMasked - robust - healRepair - blockCode;
  }
  double frac(uint64_t part) const {
    return total == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(total);
  }
};

struct GoldenResult {
  std::string output;
  uint64_t steps = 0;
  int exitValue = 0;
  VmStatus status = VmStatus::CompletedOk;
  CoverageStats coverage;
};

using OutputBound = std::function<bool(const std::string& output, const std::string& golden)>;

// Fault-free execution: reference output, step count and the measured
// address-space coverage per policy class.
GoldenResult goldenRun(const Program& program, const ResilienceProfile& profile,
                       const std::vector<double>& args, uint64_t layoutSeed,
                       uint64_t stepLimit);

// One run under a fault schedule, classified against the golden run.
RunOutcome injectRun(const Program& program, const ResilienceProfile& profile,
                     const std::vector<double>& args, const FaultSchedule& schedule,
                     const GoldenResult& golden, const OutputBound& bound,
                     uint64_t layoutSeed, uint64_t stepLimit);

// Eq. 1 with steps as the time proxy.
double efficiencyOf(uint64_t goldenSteps, uint64_t actualSteps);

CoverageStats measureCoverage(const Vm& vm);

uint64_t deriveRunSeed(uint64_t baseSeed, int rateIndex, int runIndex);

}  // namespace rolex
