#include "rolex/campaign.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace rolex {

CampaignConfig CampaignConfig::fromConfig(const KeyValueConfig& cfg) {
  CampaignConfig c;
  c.kernelName = cfg.get("kernel");
  if (c.kernelName.empty()) throw std::runtime_error("config is missing 'kernel'");
  c.corpusDir = cfg.get("kernel_dir", defaultCorpusDir());
  for (const auto& a : cfg.getList("args")) c.args.push_back(std::strtod(a.c_str(), nullptr));
  std::vector<std::string> rateList = cfg.getList("rates");
  if (rateList.empty()) rateList = {"15", "10", "5", "2", "1"};
  for (const auto& r : rateList) c.rates.push_back(std::strtod(r.c_str(), nullptr));
  for (const auto& k : cfg.getList("exact_faults"))
    c.exactFaults.push_back(static_cast<int>(std::strtol(k.c_str(), nullptr, 10)));
  c.runsPerRate = static_cast<int>(cfg.getInt("runs_per_rate", 2000));
  c.mode = cfg.get("mode", "detected") == "silent" ? FaultMode::Silent : FaultMode::Detected;
  c.baseSeed = static_cast<uint64_t>(cfg.getInt("base_seed", 42));
  c.layoutSeed = static_cast<uint64_t>(cfg.getInt("layout_seed", 1));
  c.scaleStepsPerMinute = static_cast<uint64_t>(cfg.getInt("scale", 10000));
  c.stepLimit = static_cast<uint64_t>(cfg.getInt("step_limit", 5'000'000));
  c.threads = static_cast<int>(cfg.getInt("threads", 0));
  return c;
}

std::vector<RateSummary> summarize(const std::vector<RunRow>& rows) {
  std::vector<RateSummary> out;
  for (const auto& row : rows) {
    while (static_cast<size_t>(row.rateIndex) >= out.size()) out.emplace_back();
    RateSummary& s = out[static_cast<size_t>(row.rateIndex)];
    s.rate = row.rate;
    s.runs++;
    switch (row.outcome.classification) {
      case RunClass::CompletedCorrect: s.completedCorrect++; break;
      case RunClass::DetectedCorrected: s.detectedCorrected++; break;
      case RunClass::Benign: s.benign++; break;
      case RunClass::SilentWrong: s.silentWrong++; break;
      case RunClass::TerminatedGraceful: s.terminated++; break;
      case RunClass::Crashed: s.crashed++; break;
    }
    if (row.outcome.hasEfficiency) {
      s.meanEfficiency += row.outcome.efficiency;
      s.efficiencyCount++;
    }
  }
  for (auto& s : out)
    if (s.efficiencyCount > 0) s.meanEfficiency /= s.efficiencyCount;
  return out;
}

CampaignReport runCampaign(const LoadedKernel& kernel, const CampaignConfig& config) {
  CampaignReport rep;
  rep.config = config;
  rep.kernelName = kernel.spec.name;

  const Program& prog = kernel.transformed.program;
  const ResilienceProfile& profile = kernel.transformed.profile;
  const std::vector<double>& args = config.args.empty() ? kernel.spec.defaultArgs : config.args;

  rep.golden = goldenRun(prog, profile, args, config.layoutSeed, config.stepLimit);
  if (rep.golden.status != VmStatus::CompletedOk)
    throw std::runtime_error("golden run did not complete: " + kernel.spec.name);
  {
    ResilienceProfile empty;
    GoldenResult ug = goldenRun(kernel.original, empty, args, config.layoutSeed,
                                config.stepLimit);
    rep.untransformedGoldenSteps = ug.steps;
  }

  bool exactMode = !config.exactFaults.empty();
  size_t rateCount = exactMode ? config.exactFaults.size() : config.rates.size();
  size_t cellCount = rateCount * static_cast<size_t>(config.runsPerRate);
  rep.rows.resize(cellCount);

  OutputBound bound = boundPredicate(kernel.spec.bound);
  std::atomic<size_t> nextCell{0};
  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;

  auto worker = [&]() {
    while (true) {
      size_t cell = nextCell.fetch_add(1);
      if (cell >= cellCount) return;
      int rateIndex = static_cast<int>(cell / static_cast<size_t>(config.runsPerRate));
      int runIndex = static_cast<int>(cell % static_cast<size_t>(config.runsPerRate));
      RunRow& row = rep.rows[cell];
      row.rateIndex = rateIndex;
      row.runIndex = runIndex;
      row.seed = deriveRunSeed(config.baseSeed, rateIndex, runIndex);
      FaultSchedule sched;
      sched.mode = config.mode;
      sched.seed = row.seed;
      sched.scaleStepsPerMinute = config.scaleStepsPerMinute;
      if (exactMode) {
        sched.exactFaults = config.exactFaults[static_cast<size_t>(rateIndex)];
        sched.goldenSteps = rep.golden.steps;
        row.rate = sched.exactFaults;
      } else {
        sched.intervalMinutes = config.rates[static_cast<size_t>(rateIndex)];
        row.rate = sched.intervalMinutes;
      }
      row.outcome = injectRun(prog, profile, args, sched, rep.golden, bound,
                              config.layoutSeed, config.stepLimit);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; i++) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  rep.summaries = summarize(rep.rows);
  return rep;
}

namespace {
std::string fmtDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}
}  // namespace

std::string perRunCsv(const CampaignReport& report) {
  std::string out = "run_id,rate,seed,mode,faults,classification,steps,efficiency,fault_sites\n";
  for (size_t i = 0; i < report.rows.size(); i++) {
    const RunRow& r = report.rows[i];
    out += std::to_string(i);
    out += ",";
    out += fmtDouble(r.rate);
    out += ",";
    out += std::to_string(r.seed);
    out += ",";
    out += faultModeName(report.config.mode);
    out += ",";
    out += std::to_string(r.outcome.faultEvents.size());
    out += ",";
    out += runClassName(r.outcome.classification);
    out += ",";
    out += std::to_string(r.outcome.steps);
    out += ",";
    if (r.outcome.hasEfficiency) out += fmtDouble(r.outcome.efficiency);
    out += ",";
    for (size_t f = 0; f < r.outcome.faultEvents.size(); f++) {
      if (f) out += ";";
      char buf[48];
      std::snprintf(buf, sizeof buf, "0x%llx:%d",
                    static_cast<unsigned long long>(r.outcome.faultEvents[f].address),
                    r.outcome.faultEvents[f].bitIndex);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::string summaryCsv(const CampaignReport& report) {
  std::string out =
      "rate,runs,survived,survival_frac,completed_correct,detected_corrected,benign,"
      "silent_wrong,terminated_graceful,crashed,mean_efficiency\n";
  for (const auto& s : report.summaries) {
    out += fmtDouble(s.rate) + "," + std::to_string(s.runs) + "," +
           std::to_string(s.survived()) + "," + fmtDouble(s.survivalFrac()) + "," +
           std::to_string(s.completedCorrect) + "," + std::to_string(s.detectedCorrected) +
           "," + std::to_string(s.benign) + "," + std::to_string(s.silentWrong) + "," +
           std::to_string(s.terminated) + "," + std::to_string(s.crashed) + ",";
    if (s.efficiencyCount > 0) out += fmtDouble(s.meanEfficiency);
    out += "\n";
  }
  return out;
}

std::string summaryTable(const CampaignReport& report) {
  std::ostringstream out;
  const CoverageStats& c = report.golden.coverage;
  out << "kernel " << report.kernelName << ": golden steps " << report.golden.steps
      << ", baseline steps " << report.untransformedGoldenSteps << ", static overhead "
      << fmtDouble(report.untransformedGoldenSteps > 0
                       ? static_cast<double>(report.untransformedGoldenSteps) /
                             static_cast<double>(report.golden.steps)
                       : 0.0)
      << "\n";
  out << "coverage: total " << c.total << "B | elide " << fmtDouble(c.frac(c.tolerantElide))
      << " masked " << fmtDouble(c.frac(c.tolerantMasked)) << " robust "
      << fmtDouble(c.frac(c.robust)) << " heal " << fmtDouble(c.frac(c.healRepair))
      << " code " << fmtDouble(c.frac(c.blockCode)) << " unprotected "
      << fmtDouble(c.frac(c.unprotected())) << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%10s %6s %9s %9s %9s %7s %7s %7s %7s %8s\n", "rate",
                "runs", "survival", "correct", "corrected", "benign", "sdc", "term",
                "crash", "meaneff");
  out << line;
  for (const auto& s : report.summaries) {
    std::snprintf(line, sizeof line,
                  "%10.3f %6d %9.4f %9d %9d %7d %7d %7d %7d %8s\n", s.rate, s.runs,
                  s.survivalFrac(), s.completedCorrect, s.detectedCorrected, s.benign,
                  s.silentWrong, s.terminated, s.crashed,
                  s.efficiencyCount ? fmtDouble(s.meanEfficiency).c_str() : "-");
    out << line;
  }
  return out.str();
}

std::vector<RunRow> parsePerRunCsv(const std::string& text) {
  std::vector<RunRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  std::map<double, int> rateIndexOf;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f = splitString(line, ',');
    if (f.size() < 8) continue;
    RunRow r;
    r.rate = std::strtod(f[1].c_str(), nullptr);
    auto it = rateIndexOf.find(r.rate);
    if (it == rateIndexOf.end()) {
      r.rateIndex = static_cast<int>(rateIndexOf.size());
      rateIndexOf[r.rate] = r.rateIndex;
    } else {
      r.rateIndex = it->second;
    }
    r.seed = std::strtoull(f[2].c_str(), nullptr, 10);
    std::string cls = f[5];
    for (int c = 0; c <= static_cast<int>(RunClass::Crashed); c++)
      if (cls == runClassName(static_cast<RunClass>(c)))
        r.outcome.classification = static_cast<RunClass>(c);
    r.outcome.steps = std::strtoull(f[6].c_str(), nullptr, 10);
    if (!f[7].empty()) {
      r.outcome.hasEfficiency = true;
      r.outcome.efficiency = std::strtod(f[7].c_str(), nullptr);
    }
    size_t faults = static_cast<size_t>(std::strtoull(f[4].c_str(), nullptr, 10));
    r.outcome.faultEvents.resize(faults);
    rows.push_back(std::move(r));
  }
  return rows;
}

void writeFileAtomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

}  // namespace rolex
