#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rolex/ast.hpp"
#include "rolex/bitmask.hpp"

namespace rolex {

enum class ProfileKind {
  Tolerant,
  Robust,
  Heal,
  TolerantHeap,
  RobustHeap,
  RepairableHeap,
  Block,
};

enum class BlockPolicy {
  None,
  Rollback,
  Rollforward,
  RobustBlock,  // redundant execution of an outlined block
  Retry,        // declare resilient retry
  Ignore,       // declare resilient ignore [fallback]
  RobustFn,     // declare resilient robust(strength) [fallback]
};

const char* blockPolicyName(BlockPolicy p);

// One line of the resilience profile: the unit of error-management
// knowledge handed from the front end to the runtime.
struct ProfileRecord {
  ProfileKind kind = ProfileKind::Tolerant;
  std::string constructId;
  ElementKind elementKind = ElementKind::None;

  // Tolerant / TolerantHeap
  std::optional<ToleranceMask> mask;
  bool fullElision = false;

  // Robust / RobustHeap
  Strength strength = Strength::None;
  std::vector<std::string> replicaIds;  // replica construct ids, qualifier form

  // Heal / RepairableHeap / ameliorate
  std::string recoveryFn;

  // Block / declare-function records
  BlockPolicy policy = BlockPolicy::None;
  std::string outlinedFn;  // outlined function / wrapped target function
  std::string hostFn;      // function containing the directive
  std::vector<std::string> shareVars;
  std::vector<std::string> privateVars;
  std::vector<std::string> reinitializeVars;
  std::vector<std::string> compareVars;
  bool hasDefaultClause = false;
  bool defaultShared = true;
  std::optional<double> fallbackValue;  // numeric fallback (stored exactly for ints)
  std::string fallbackSymbol;           // fallback naming a global instead
  bool hasFallback = false;
  uint64_t codeBytes = 0;  // synthetic instruction-memory footprint
};

struct ResilienceProfile {
  std::vector<ProfileRecord> records;

  const ProfileRecord* find(const std::string& constructId) const {
    for (const auto& r : records)
      if (r.constructId == constructId) return &r;
    return nullptr;
  }
};

// Line-oriented text form: "ROLEXPROFILE 1" header, then one record per
// line, "KIND constructId elementKind key=value...". Deterministic and
// bit-exact for a given profile.
std::string serializeProfile(const ResilienceProfile& p);
ResilienceProfile parseProfile(const std::string& text);  // throws on malformed input

}  // namespace rolex
