#pragma once

#include <memory>
#include <string>

#include "doctest.h"
#include "rolex/parser.hpp"
#include "rolex/transform.hpp"
#include "rolex/validate.hpp"
#include "rolex/vm.hpp"

namespace rolextest {

inline rolex::Program parseValidated(const std::string& src) {
  rolex::ParseResult r = rolex::parseSource(src);
  REQUIRE_MESSAGE(r.ok(), (r.diagnostics.empty() ? "?" : r.diagnostics[0].message));
  auto ds = rolex::validate(r.program);
  REQUIRE_MESSAGE(!rolex::hasErrors(ds), (ds.empty() ? "?" : ds[0].message));
  return std::move(r.program);
}

inline rolex::TransformResult transformSource(const std::string& src) {
  rolex::TransformResult t = rolex::transform(parseValidated(src));
  REQUIRE_MESSAGE(t.ok(), (t.diagnostics.empty() ? "?" : t.diagnostics[0].message));
  return t;
}

struct RunResult {
  rolex::VmStatus status;
  std::string output;
  uint64_t steps;
  int exitValue;
  std::string reason;
};

inline RunResult runProgram(const rolex::Program& p, const rolex::ResilienceProfile& profile,
                            uint64_t stepLimit = 2'000'000, uint64_t layoutSeed = 0,
                            std::vector<double> args = {}) {
  rolex::VmOptions opts;
  opts.layoutSeed = layoutSeed;
  opts.stepLimit = stepLimit;
  opts.args = std::move(args);
  rolex::Vm vm(p, profile, opts);
  vm.run(stepLimit);
  return {vm.status(), vm.output(), vm.stepCount(), vm.exitValue(), vm.crashReason()};
}

inline RunResult runSource(const std::string& src, uint64_t stepLimit = 2'000'000) {
  rolex::Program p = parseValidated(src);
  rolex::ResilienceProfile empty;
  return runProgram(p, empty, stepLimit);
}

}  // namespace rolextest
