#include "rolex/profile.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "rolex/config.hpp"

namespace rolex {

const char* blockPolicyName(BlockPolicy p) {
  switch (p) {
    case BlockPolicy::None: return "none";
    case BlockPolicy::Rollback: return "rollback";
    case BlockPolicy::Rollforward: return "rollforward";
    case BlockPolicy::RobustBlock: return "robust";
    case BlockPolicy::Retry: return "retry";
    case BlockPolicy::Ignore: return "ignore";
    case BlockPolicy::RobustFn: return "robustfn";
  }
  return "none";
}

namespace {

BlockPolicy blockPolicyFromName(const std::string& s) {
  if (s == "rollback") return BlockPolicy::Rollback;
  if (s == "rollforward") return BlockPolicy::Rollforward;
  if (s == "robust") return BlockPolicy::RobustBlock;
  if (s == "retry") return BlockPolicy::Retry;
  if (s == "ignore") return BlockPolicy::Ignore;
  if (s == "robustfn") return BlockPolicy::RobustFn;
  return BlockPolicy::None;
}

const char* kindName(ProfileKind k) {
  switch (k) {
    case ProfileKind::Tolerant: return "TOLERANT";
    case ProfileKind::Robust: return "ROBUST";
    case ProfileKind::Heal: return "HEAL";
    case ProfileKind::TolerantHeap: return "TOLERANTHEAP";
    case ProfileKind::RobustHeap: return "ROBUSTHEAP";
    case ProfileKind::RepairableHeap: return "REPAIRABLEHEAP";
    case ProfileKind::Block: return "BLOCK";
  }
  return "?";
}

ProfileKind kindFromName(const std::string& s) {
  if (s == "TOLERANT") return ProfileKind::Tolerant;
  if (s == "ROBUST") return ProfileKind::Robust;
  if (s == "HEAL") return ProfileKind::Heal;
  if (s == "TOLERANTHEAP") return ProfileKind::TolerantHeap;
  if (s == "ROBUSTHEAP") return ProfileKind::RobustHeap;
  if (s == "REPAIRABLEHEAP") return ProfileKind::RepairableHeap;
  if (s == "BLOCK") return ProfileKind::Block;
  throw std::runtime_error("unknown profile record kind: " + s);
}

std::string joinList(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); i++) {
    if (i) out += ",";
    out += v[i];
  }
  return out;
}

std::string numberToText(double v) {
  if (v == static_cast<double>(static_cast<long long>(v))) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string serializeProfile(const ResilienceProfile& p) {
  std::string out = "ROLEXPROFILE 1\n";
  for (const auto& r : p.records) {
    out += kindName(r.kind);
    out += " " + r.constructId + " " + elementKindName(r.elementKind);
    switch (r.kind) {
      case ProfileKind::Tolerant:
      case ProfileKind::TolerantHeap:
        if (r.fullElision)
          out += " elide=1";
        else if (r.mask)
          out += " mask=" + maskToHex(*r.mask);
        break;
      case ProfileKind::Robust:
      case ProfileKind::RobustHeap:
        out += " strength=" + std::to_string(strengthCopies(r.strength));
        if (!r.replicaIds.empty()) out += " replicas=" + joinList(r.replicaIds);
        break;
      case ProfileKind::Heal:
      case ProfileKind::RepairableHeap:
        out += " fn=" + r.recoveryFn;
        break;
      case ProfileKind::Block:
        out += " policy=" + std::string(blockPolicyName(r.policy));
        out += " host=" + r.hostFn;
        out += " target=" + r.outlinedFn;
        out += " codebytes=" + std::to_string(r.codeBytes);
        if (r.policy == BlockPolicy::RobustBlock || r.policy == BlockPolicy::RobustFn)
          out += " strength=" + std::to_string(strengthCopies(r.strength));
        if (!r.shareVars.empty()) out += " share=" + joinList(r.shareVars);
        if (!r.privateVars.empty()) out += " private=" + joinList(r.privateVars);
        if (!r.reinitializeVars.empty()) out += " reinitialize=" + joinList(r.reinitializeVars);
        if (!r.compareVars.empty()) out += " compare=" + joinList(r.compareVars);
        if (!r.recoveryFn.empty()) out += " ameliorate=" + r.recoveryFn;
        if (r.hasDefaultClause) out += std::string(" default=") + (r.defaultShared ? "shared" : "none");
        if (r.hasFallback) {
          out += " fallback=";
          if (r.fallbackValue) out += numberToText(*r.fallbackValue);
        }
        if (!r.fallbackSymbol.empty()) out += " fallbacksym=" + r.fallbackSymbol;
        break;
    }
    out += "\n";
  }
  return out;
}

ResilienceProfile parseProfile(const std::string& text) {
  ResilienceProfile p;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "ROLEXPROFILE 1")
    throw std::runtime_error("missing ROLEXPROFILE header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind, id, elem;
    if (!(ls >> kind >> id >> elem))
      throw std::runtime_error("malformed profile record: " + line);
    ProfileRecord r;
    r.kind = kindFromName(kind);
    r.constructId = id;
    r.elementKind = elementKindFromName(elem);
    std::string kv;
    while (ls >> kv) {
      size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("malformed profile field: " + kv);
      std::string key = kv.substr(0, eq);
      std::string value = kv.substr(eq + 1);
      if (key == "elide") {
        r.fullElision = value == "1";
        if (r.fullElision) r.mask = deriveMask(r.elementKind, nullptr);
      } else if (key == "mask") {
        ToleranceMask m;
        m.elementKind = r.elementKind;
        m.keepMask = std::strtoull(value.c_str(), nullptr, 16);
        m.coerceMask = m.allBits() & ~m.keepMask;
        r.mask = m;
      } else if (key == "strength") {
        r.strength = value == "3" ? Strength::Correct : Strength::Detect;
      } else if (key == "replicas") {
        r.replicaIds = splitString(value, ',');
      } else if (key == "fn" || key == "ameliorate") {
        r.recoveryFn = value;
      } else if (key == "policy") {
        r.policy = blockPolicyFromName(value);
      } else if (key == "host") {
        r.hostFn = value;
      } else if (key == "target") {
        r.outlinedFn = value;
      } else if (key == "codebytes") {
        r.codeBytes = std::strtoull(value.c_str(), nullptr, 10);
      } else if (key == "share") {
        r.shareVars = splitString(value, ',');
      } else if (key == "private") {
        r.privateVars = splitString(value, ',');
      } else if (key == "reinitialize") {
        r.reinitializeVars = splitString(value, ',');
      } else if (key == "compare") {
        r.compareVars = splitString(value, ',');
      } else if (key == "default") {
        r.hasDefaultClause = true;
        r.defaultShared = value == "shared";
      } else if (key == "fallback") {
        r.hasFallback = true;
        if (!value.empty()) r.fallbackValue = std::strtod(value.c_str(), nullptr);
      } else if (key == "fallbacksym") {
        r.hasFallback = true;
        r.fallbackSymbol = value;
      } else {
        throw std::runtime_error("unknown profile field: " + key);
      }
    }
    p.records.push_back(std::move(r));
  }
  return p;
}

}  // namespace rolex
