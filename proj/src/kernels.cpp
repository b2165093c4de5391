#include "rolex/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rolex/config.hpp"
#include "rolex/parser.hpp"
#include "rolex/validate.hpp"

#ifndef ROLEX_KERNEL_DIR
#define ROLEX_KERNEL_DIR "kernels"
#endif

namespace rolex {

std::string defaultCorpusDir() { return ROLEX_KERNEL_DIR; }

BoundSpec BoundSpec::parse(const std::string& text) {
  BoundSpec b;
  std::vector<std::string> parts = splitString(text, ':');
  const std::string& k = parts.empty() ? text : parts[0];
  if (k == "exact") {
    b.kind = Kind::Exact;
  } else if (k == "mismatch-frac") {
    b.kind = Kind::MismatchFrac;
    b.p1 = parts.size() > 1 ? std::strtod(parts[1].c_str(), nullptr) : 0.01;
  } else if (k == "pixel-frac") {
    b.kind = Kind::PixelFrac;
    b.p1 = parts.size() > 1 ? std::strtod(parts[1].c_str(), nullptr) : 65536.0;
    b.p2 = parts.size() > 2 ? std::strtod(parts[2].c_str(), nullptr) : 0.05;
  } else if (k == "final-rel") {
    b.kind = Kind::FinalRel;
    b.p1 = parts.size() > 1 ? std::strtod(parts[1].c_str(), nullptr) : 0.05;
  } else if (k == "resid-below") {
    b.kind = Kind::ResidBelow;
    b.p1 = parts.size() > 1 ? std::strtod(parts[1].c_str(), nullptr) : 1e-6;
  } else {
    throw std::runtime_error("unknown bound kind: " + text);
  }
  return b;
}

std::string BoundSpec::toString() const {
  char buf[64];
  switch (kind) {
    case Kind::Exact: return "exact";
    case Kind::MismatchFrac:
      std::snprintf(buf, sizeof buf, "mismatch-frac:%g", p1);
      return buf;
    case Kind::PixelFrac:
      std::snprintf(buf, sizeof buf, "pixel-frac:%g:%g", p1, p2);
      return buf;
    case Kind::FinalRel:
      std::snprintf(buf, sizeof buf, "final-rel:%g", p1);
      return buf;
    case Kind::ResidBelow:
      std::snprintf(buf, sizeof buf, "resid-below:%g", p1);
      return buf;
  }
  return "exact";
}

namespace {

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

double lastNumeric(const std::string& s, bool& ok) {
  auto toks = tokens(s);
  for (auto it = toks.rbegin(); it != toks.rend(); ++it) {
    char* end = nullptr;
    double v = std::strtod(it->c_str(), &end);
    if (end && *end == '\0' && end != it->c_str()) {
      ok = true;
      return v;
    }
  }
  ok = false;
  return 0.0;
}

}  // namespace

bool correctnessCheck(const BoundSpec& bound, const std::string& output,
                      const std::string& golden) {
  switch (bound.kind) {
    case BoundSpec::Kind::Exact:
      return output == golden;
    case BoundSpec::Kind::MismatchFrac: {
      auto a = tokens(output);
      auto b = tokens(golden);
      if (a.size() != b.size() || b.empty()) return false;
      size_t mismatch = 0;
      for (size_t i = 0; i < a.size(); i++)
        if (a[i] != b[i]) mismatch++;
      return static_cast<double>(mismatch) / static_cast<double>(b.size()) <= bound.p1;
    }
    case BoundSpec::Kind::PixelFrac: {
      auto a = tokens(output);
      auto b = tokens(golden);
      if (a.size() != b.size() || b.empty()) return false;
      size_t off = 0;
      for (size_t i = 0; i < a.size(); i++) {
        long long x = std::strtoll(a[i].c_str(), nullptr, 10);
        long long y = std::strtoll(b[i].c_str(), nullptr, 10);
        if (std::llabs(x - y) > static_cast<long long>(bound.p1)) off++;
      }
      return static_cast<double>(off) / static_cast<double>(b.size()) < bound.p2;
    }
    case BoundSpec::Kind::FinalRel: {
      bool okA, okB;
      double x = lastNumeric(output, okA);
      double y = lastNumeric(golden, okB);
      if (!okA || !okB) return false;
      if (y == 0.0) return std::fabs(x) <= bound.p1;
      return std::fabs(x - y) / std::fabs(y) <= bound.p1;
    }
    case BoundSpec::Kind::ResidBelow: {
      bool ok;
      double x = lastNumeric(output, ok);
      return ok && std::fabs(x) < bound.p1;
    }
  }
  return false;
}

OutputBound boundPredicate(const BoundSpec& bound) {
  return [bound](const std::string& out, const std::string& gold) {
    return correctnessCheck(bound, out, gold);
  };
}

std::vector<KernelSpec> corpus(const std::string& corpusDir) {
  KeyValueConfig cfg = KeyValueConfig::parseFile(corpusDir + "/manifest.cfg");
  std::vector<std::string> names = cfg.getList("kernels");
  std::vector<KernelSpec> out;
  for (const auto& name : names) {
    KernelSpec k;
    k.name = name;
    k.sourcePath = cfg.get(name + ".source", name + ".rc");
    for (const auto& a : cfg.getList(name + ".args"))
      k.defaultArgs.push_back(std::strtod(a.c_str(), nullptr));
    k.bound = BoundSpec::parse(cfg.get(name + ".bound", "exact"));
    k.defaultMode =
        cfg.get(name + ".mode", "detected") == "silent" ? FaultMode::Silent : FaultMode::Detected;
    k.rolexConstructsUsed = cfg.getList(name + ".constructs");
    out.push_back(std::move(k));
  }
  return out;
}

const KernelSpec* findKernel(const std::vector<KernelSpec>& specs, const std::string& name) {
  for (const auto& k : specs)
    if (k.name == name) return &k;
  return nullptr;
}

LoadedKernel loadKernel(const std::string& corpusDir, const KernelSpec& spec) {
  std::string path = corpusDir + "/" + spec.sourcePath;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kernel source: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string source = ss.str();

  auto mustParse = [&](const char* what) {
    ParseResult r = parseSource(source);
    if (!r.ok())
      throw std::runtime_error(spec.name + ": parse failed (" + std::string(what) + "): " +
                               (r.diagnostics.empty() ? "?" : r.diagnostics[0].message));
    auto ds = validate(r.program);
    if (hasErrors(ds))
      throw std::runtime_error(spec.name + ": validation failed: " + ds[0].message);
    return std::move(r.program);
  };

  LoadedKernel lk;
  lk.spec = spec;
  lk.original = mustParse("original");
  Program second = mustParse("transform input");
  lk.transformed = transform(std::move(second));
  if (!lk.transformed.ok())
    throw std::runtime_error(spec.name + ": transform failed: " +
                             lk.transformed.diagnostics[0].message);
  return lk;
}

}  // namespace rolex
