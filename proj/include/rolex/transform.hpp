#pragma once

#include <map>

#include "rolex/ast.hpp"
#include "rolex/profile.hpp"

namespace rolex {

struct TransformResult {
  Program program;  // directive-free, replicas declared, calls rewritten
  ResilienceProfile profile;
  std::map<std::string, std::string> outlinedFunctions;  // block id -> function
  std::vector<std::string> icvs;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return !hasErrors(diagnostics); }
};

// The resilience pass: replicates robust-qualified state and the statements
// that write it, outlines directive-bound structured blocks into functions
// bracketed with runtime calls, generates resilient versions of
// declare-annotated functions, and emits the profile the runtime loads at
// start. The input program must have passed validation.
TransformResult transform(Program&& program);

// Profile emission without the structural pass (used by --no-rolex, which
// strips pragma constructs only).
TransformResult stripDirectivesOnly(Program&& program);

// Runs both programs fault-free in the interpreter and compares observable
// behavior (print stream and exit status). `why` receives a description of
// the first divergence.
bool equivalenceCheck(const Program& original, const Program& transformed,
                      const ResilienceProfile& profile, const std::vector<double>& args,
                      uint64_t stepLimit, std::string* why = nullptr);

}  // namespace rolex
