#pragma once

#include "rolex/config.hpp"
#include "rolex/kernels.hpp"

namespace rolex {

struct CampaignConfig {
  std::string kernelName;
  std::string corpusDir;
  std::vector<double> args;
  std::vector<double> rates;   // fault intervals in simulated minutes
  std::vector<int> exactFaults;  // non-empty: exact-count mode, one row per k
  int runsPerRate = 2000;
  FaultMode mode = FaultMode::Detected;
  uint64_t baseSeed = 42;
  uint64_t layoutSeed = 1;
  uint64_t scaleStepsPerMinute = 10000;
  uint64_t stepLimit = 5'000'000;
  int threads = 0;  // 0: hardware concurrency

  static CampaignConfig fromConfig(const KeyValueConfig& cfg);
};

struct RunRow {
  int rateIndex = 0;
  double rate = 0;  // interval minutes, or k in exact mode
  int runIndex = 0;
  uint64_t seed = 0;
  RunOutcome outcome;
};

struct RateSummary {
  double rate = 0;
  int runs = 0;
  int completedCorrect = 0;
  int detectedCorrected = 0;
  int benign = 0;
  int silentWrong = 0;
  int terminated = 0;
  int crashed = 0;
  int survived() const { return completedCorrect + detectedCorrected + benign; }
  double survivalFrac() const {
    return runs == 0 ? 0.0 : static_cast<double>(survived()) / runs;
  }
  double meanEfficiency = 0.0;
  int efficiencyCount = 0;
};

struct CampaignReport {
  CampaignConfig config;
  std::string kernelName;
  GoldenResult golden;               // transformed program, fault free
  uint64_t untransformedGoldenSteps = 0;
  std::vector<RunRow> rows;
  std::vector<RateSummary> summaries;
};

// Runs the (rate x run) grid. Cells execute in parallel; results are
// deterministic for a fixed config regardless of thread count.
CampaignReport runCampaign(const LoadedKernel& kernel, const CampaignConfig& config);

// recomputable aggregates (also used by the report command)
std::vector<RateSummary> summarize(const std::vector<RunRow>& rows);

std::string perRunCsv(const CampaignReport& report);
std::string summaryCsv(const CampaignReport& report);
std::string summaryTable(const CampaignReport& report);

// parses a per-run CSV back into rows (report command)
std::vector<RunRow> parsePerRunCsv(const std::string& text);

// atomic write: temp file in the target directory, then rename
void writeFileAtomic(const std::string& path, const std::string& content);

}  // namespace rolex
