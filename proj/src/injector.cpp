#include "rolex/injector.hpp"

#include <algorithm>

namespace rolex {

const char* faultModeName(FaultMode m) {
  return m == FaultMode::Detected ? "detected" : "silent";
}

const char* runClassName(RunClass c) {
  switch (c) {
    case RunClass::CompletedCorrect: return "completed-correct";
    case RunClass::DetectedCorrected: return "detected-corrected";
    case RunClass::Benign: return "benign";
    case RunClass::SilentWrong: return "silent-wrong";
    case RunClass::TerminatedGraceful: return "terminated-graceful";
    case RunClass::Crashed: return "crashed";
  }
  return "?";
}

namespace {

struct SplitMix {
  uint64_t state;
  explicit SplitMix(uint64_t seed) : state(seed * 0x9e3779b97f4a7c15ull + 0x1234567887654321ull) {}
  uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }
};

std::vector<uint64_t> scheduleTimes(const FaultSchedule& s) {
  std::vector<uint64_t> times;
  if (s.singleShot) {
    times.push_back(s.atStep);
    return times;
  }
  if (s.exactFaults > 0) {
    SplitMix rng(s.seed ^ 0xabcdef0123456789ull);
    uint64_t span = s.goldenSteps > 1 ? s.goldenSteps - 1 : 1;
    for (int i = 0; i < s.exactFaults; i++) times.push_back(1 + rng.below(span));
    std::sort(times.begin(), times.end());
    // distinct, strictly increasing step times
    for (size_t i = 1; i < times.size(); i++)
      if (times[i] <= times[i - 1]) times[i] = times[i - 1] + 1;
    return times;
  }
  if (s.intervalMinutes > 0) {
    double stepsPerInterval = s.intervalMinutes * static_cast<double>(s.scaleStepsPerMinute);
    // one fault per interval, fired at the midpoint; the run's natural end
    // bounds how many of these occur
    for (int i = 0; i < 4096; i++) {
      double t = (static_cast<double>(i) + 0.5) * stepsPerInterval;
      times.push_back(static_cast<uint64_t>(t));
    }
  }
  return times;
}

Addr pickSite(Vm& vm, SplitMix& rng, const FaultSchedule& s) {
  if (!s.targetConstruct.empty()) {
    const SymbolPlacement* pl = vm.findConstruct(s.targetConstruct);
    if (pl) return pl->base + rng.below(pl->length);
    const DrmEntry* e = vm.runtime().drm().byId(s.targetConstruct);
    if (e && !e->ranges.empty())
      return e->ranges[0].first + rng.below(e->ranges[0].second);
    return 0;
  }
  uint64_t n = vm.memory().mappedByteCount();
  if (n == 0) return 0;
  return vm.memory().mappedByteAt(rng.below(n));
}

}  // namespace

double efficiencyOf(uint64_t goldenSteps, uint64_t actualSteps) {
  if (actualSteps == 0) return 0.0;
  return static_cast<double>(goldenSteps) / static_cast<double>(actualSteps);
}

CoverageStats measureCoverage(const Vm& vm) {
  CoverageStats c;
  c.total = vm.memory().mappedByteCount();
  for (const auto& e : vm.runtime().drm().entries()) {
    uint64_t bytes = 0;
    for (const auto& [b, l] : e.ranges) bytes += l;
    switch (e.kind) {
      case ProfileKind::Tolerant:
      case ProfileKind::TolerantHeap:
        if (e.fullElision)
          c.tolerantElide += bytes;
        else
          c.tolerantMasked += bytes;
        break;
      case ProfileKind::Robust:
      case ProfileKind::RobustHeap:
        c.robust += bytes;
        break;
      case ProfileKind::Heal:
      case ProfileKind::RepairableHeap:
        c.healRepair += bytes;
        break;
      default:
        break;
    }
  }
  for (const auto& r : vm.memory().codeRanges()) c.blockCode += r.length;
  return c;
}

GoldenResult goldenRun(const Program& program, const ResilienceProfile& profile,
                       const std::vector<double>& args, uint64_t layoutSeed,
                       uint64_t stepLimit) {
  VmOptions opts;
  opts.args = args;
  opts.layoutSeed = layoutSeed;
  opts.stepLimit = stepLimit;
  Vm vm(program, profile, opts);
  vm.run(stepLimit);
  GoldenResult g;
  g.output = vm.output();
  g.steps = vm.stepCount();
  g.exitValue = vm.exitValue();
  g.status = vm.status();
  g.coverage = measureCoverage(vm);
  return g;
}

RunOutcome injectRun(const Program& program, const ResilienceProfile& profile,
                     const std::vector<double>& args, const FaultSchedule& schedule,
                     const GoldenResult& golden, const OutputBound& bound,
                     uint64_t layoutSeed, uint64_t stepLimit) {
  VmOptions opts;
  opts.args = args;
  opts.layoutSeed = layoutSeed;
  opts.stepLimit = stepLimit;
  Vm vm(program, profile, opts);

  std::vector<uint64_t> times = scheduleTimes(schedule);
  SplitMix rng(schedule.seed);
  size_t nextFault = 0;
  RunOutcome out;

  while (vm.status() == VmStatus::Running) {
    while (nextFault < times.size() && vm.stepCount() >= times[nextFault]) {
      FaultEvent ev;
      ev.stepTime = vm.stepCount();
      ev.mode = schedule.mode;
      if (schedule.singleShot) {
        ev.address = schedule.address;
        ev.bitIndex = schedule.bitIndex;
      } else {
        ev.address = pickSite(vm, rng, schedule);
        ev.bitIndex = static_cast<int>(rng.below(8));
      }
      nextFault++;
      if (ev.address == 0) continue;
      std::string hit;
      if (vm.applyFault(ev.address, ev.bitIndex, schedule.mode == FaultMode::Detected, &hit)) {
        ev.drmEntryHit = hit;
        out.faultEvents.push_back(std::move(ev));
      }
      if (vm.status() != VmStatus::Running) break;
    }
    if (vm.status() != VmStatus::Running) break;
    if (vm.stepCount() >= stepLimit) break;
    vm.step();
  }
  if (vm.status() == VmStatus::Running) {
    // fault application crashed nothing but the limit tripped
    vm.run(stepLimit);
  }

  out.finalStatus = vm.status();
  out.reason = vm.crashReason();
  out.steps = vm.stepCount();
  out.deliveredNotifications = vm.notifications().deliveredCount();
  out.actions = vm.runtime().actionLog();

  switch (vm.status()) {
    case VmStatus::Crashed:
      out.classification = RunClass::Crashed;
      break;
    case VmStatus::TerminatedGraceful:
      out.classification = RunClass::TerminatedGraceful;
      break;
    case VmStatus::CompletedOk: {
      out.hasEfficiency = true;
      out.efficiency = efficiencyOf(golden.steps, out.steps);
      bool pass = bound ? bound(vm.output(), golden.output) : vm.output() == golden.output;
      if (!pass) {
        out.classification = RunClass::SilentWrong;
        break;
      }
      if (out.faultEvents.empty()) {
        out.classification = RunClass::CompletedCorrect;
        break;
      }
      bool corrective = false;
      bool elided = false;
      for (const auto& a : out.actions) {
        switch (a.kind) {
          case RecoveryActionKind::Coerce:
          case RecoveryActionKind::MaskReset:
          case RecoveryActionKind::Rollback:
          case RecoveryActionKind::Rollforward:
          case RecoveryActionKind::Retry:
          case RecoveryActionKind::IgnoreWithFallback:
            corrective = true;
            break;
          case RecoveryActionKind::VoteCorrect:
          case RecoveryActionKind::HealInvoke:
            if (a.repaired) corrective = true;
            break;
          case RecoveryActionKind::Elide:
            elided = true;
            break;
          default:
            break;
        }
      }
      if (corrective)
        out.classification = RunClass::DetectedCorrected;
      else if (elided || schedule.mode == FaultMode::Silent)
        out.classification = elided ? RunClass::CompletedCorrect : RunClass::Benign;
      else
        out.classification = RunClass::Benign;
      break;
    }
    case VmStatus::Running:
      out.classification = RunClass::Crashed;
      out.reason = "timeout";
      break;
  }
  return out;
}

uint64_t deriveRunSeed(uint64_t baseSeed, int rateIndex, int runIndex) {
  SplitMix rng(baseSeed ^ (static_cast<uint64_t>(rateIndex) << 40) ^
               (static_cast<uint64_t>(runIndex) + 1));
  return rng.next();
}

}  // namespace rolex
