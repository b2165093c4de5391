#include "helpers.hpp"
#include "rolex/injector.hpp"

using namespace rolex;
using namespace rolextest;

TEST_CASE("print evaluates and counts one step per statement") {
  RunResult r = runSource("int main() { print(1 + 2); return 0; }");
  CHECK(r.status == VmStatus::CompletedOk);
  CHECK(r.output == "3\n");
  // print + return
  CHECK(r.steps == 2);
}

TEST_CASE("arithmetic follows two's-complement and IEEE semantics") {
  RunResult r = runSource(
      "int main() {\n"
      "  unsigned int u; int i; double d; float f;\n"
      "  u = 4294967295; u = u + 1; print(u);\n"
      "  i = 2147483647; i = i + 1; print(i);\n"
      "  d = 1.0; d = d / 0.0; print(d > 1000000.0);\n"
      "  f = 0.5; f = f + 0.25; print(f);\n"
      "  i = 7 % 3; print(i);\n"
      "  u = 10; u = u / 3; print(u);\n"
      "  return 0;\n}\n");
  CHECK(r.status == VmStatus::CompletedOk);
  CHECK(r.output == "0\n-2147483648\n1\n0.75\n1\n3\n");
}

TEST_CASE("integer division by zero crashes the run") {
  RunResult r = runSource("int main() { int a; int b; a = 1; b = 0; a = a / b; return 0; }");
  CHECK(r.status == VmStatus::Crashed);
  CHECK(r.reason == "division-by-zero");
}

TEST_CASE("NaN in a control predicate crashes deterministically") {
  RunResult r = runSource(
      "int main() { double d; d = 0.0; d = d / 0.0; if (d) { print(1); } return 0; }");
  CHECK(r.status == VmStatus::Crashed);
  CHECK(r.reason == "nan-predicate");
}

TEST_CASE("named array accesses are bounds-checked") {
  RunResult r = runSource(
      "int a[4];\nint main() { int i; i = 5; a[i] = 1; return 0; }");
  CHECK(r.status == VmStatus::Crashed);
  CHECK(r.reason == "out-of-bounds");
  RunResult r2 = runSource(
      "int m[2][3];\nint main() { int i; i = 3; m[1][i] = 1; return 0; }");
  CHECK(r2.status == VmStatus::Crashed);
}

TEST_CASE("uninitialized reads crash instead of yielding garbage") {
  RunResult r = runSource("int main() { int x; int y; y = x + 1; return y; }");
  CHECK(r.status == VmStatus::Crashed);
  CHECK(r.reason == "uninitialized-read");
}

TEST_CASE("dereferencing an unmapped pointer crashes as an invalid access") {
  RunResult r = runSource(
      "int main() { int* p; p = NULL; *p = 3; return 0; }");
  CHECK(r.status == VmStatus::Crashed);
  CHECK(r.reason == "invalid-access");
}

TEST_CASE("pointer arithmetic walks elements and heap blocks bound accesses") {
  RunResult r = runSource(
      "int main() {\n"
      "  int* p; int i;\n"
      "  p = malloc(4 * sizeof(int));\n"
      "  for (i = 0; i < 4; i += 1) { p[i] = i * 10; }\n"
      "  print(*p, p[3], *(p + 2));\n"
      "  free(p);\n"
      "  return 0;\n}\n");
  CHECK(r.status == VmStatus::CompletedOk);
  CHECK(r.output == "0 30 20\n");
}

TEST_CASE("access past a heap block is unmapped even inside the segment") {
  RunResult r = runSource(
      "int main() { int* p; p = malloc(2 * sizeof(int)); p[0] = 1; p[1] = 2; p[2] = 3; return 0; }");
  CHECK(r.status == VmStatus::Crashed);
  CHECK(r.reason == "invalid-access");
}

TEST_CASE("2-D arrays, functions and while loops compose") {
  RunResult r = runSource(
      "int m[3][3];\n"
      "int sum() { int s; int i; int j; s = 0;\n"
      "  for (i = 0; i < 3; i += 1) { for (j = 0; j < 3; j += 1) { s = s + m[i][j]; } }\n"
      "  return s; }\n"
      "int main() {\n"
      "  int i; int j;\n"
      "  for (i = 0; i < 3; i += 1) { for (j = 0; j < 3; j += 1) { m[i][j] = i * 3 + j; } }\n"
      "  int t; t = sum();\n"
      "  print(t);\n"
      "  while (t > 30) { t = t - 1; }\n"
      "  print(t);\n"
      "  return 0;\n}\n");
  CHECK(r.status == VmStatus::CompletedOk);
  CHECK(r.output == "36\n30\n");
}

TEST_CASE("rolex_malloc_tolerant with NULL registers a full-elision heap entry") {
  Program p = parseValidated(
      "unsigned int* t;\nint main() { t = rolex_malloc_tolerant(16 * sizeof(unsigned int), NULL);"
      " t[0] = 1; return 0; }");
  ResilienceProfile empty;
  VmOptions opts;
  Vm vm(p, empty, opts);
  vm.run(100000);
  REQUIRE(vm.status() == VmStatus::CompletedOk);
  REQUIRE(vm.runtime().drm().entries().size() == 1);
  const DrmEntry& e = vm.runtime().drm().entries()[0];
  CHECK(e.kind == ProfileKind::TolerantHeap);
  CHECK(e.fullElision);
  CHECK(e.dynamic);
  CHECK(e.ranges[0].second == 64);
}

TEST_CASE("rolex_malloc_robust keeps three mirrored copies") {
  Program p = parseValidated(
      "int* t;\nint main() { t = rolex_malloc_robust(8 * sizeof(int), 3); t[2] = 77; return 0; }");
  ResilienceProfile empty;
  VmOptions opts;
  Vm vm(p, empty, opts);
  vm.run(100000);
  REQUIRE(vm.status() == VmStatus::CompletedOk);
  const DrmEntry& e = vm.runtime().drm().entries()[0];
  CHECK(e.kind == ProfileKind::RobustHeap);
  REQUIRE(e.ranges.size() == 3);
  // the write through the program pointer reached every copy
  for (const auto& [base, len] : e.ranges) {
    uint32_t v = 0;
    REQUIRE(vm.memory().read(base + 8, &v, 4) == Access::Ok);
    CHECK(v == 77);
  }
}

TEST_CASE("rolex_malloc_repairable records the recovery function") {
  Program p = parseValidated(
      "int* t;\nint fixit() { return 1; }\n"
      "int main() { t = rolex_malloc_repairable(4 * sizeof(int), fixit); return 0; }");
  ResilienceProfile empty;
  VmOptions opts;
  Vm vm(p, empty, opts);
  vm.run(100000);
  const DrmEntry& e = vm.runtime().drm().entries()[0];
  CHECK(e.kind == ProfileKind::RepairableHeap);
  CHECK(e.recoveryFnIndex == p.findFunction("fixit"));
}

TEST_CASE("free deregisters dynamic entries") {
  Program p = parseValidated(
      "int* t;\nint main() { t = rolex_malloc_tolerant(4 * sizeof(int), NULL); free(t); return 0; }");
  ResilienceProfile empty;
  Vm vm(p, empty, {});
  vm.run(100000);
  CHECK(vm.status() == VmStatus::CompletedOk);
  CHECK(vm.runtime().drm().entries().empty());
}

TEST_CASE("fault-free runs are bit-deterministic") {
  const char* src =
      "int main() { int i; double s; s = 0.0;\n"
      "  for (i = 1; i <= 100; i += 1) { s = s + 1.0 / i; }\n"
      "  print(s); return 0; }";
  RunResult a = runSource(src);
  RunResult b = runSource(src);
  CHECK(a.status == VmStatus::CompletedOk);
  CHECK(a.output == b.output);
  CHECK(a.steps == b.steps);
}

TEST_CASE("layout seeds move symbols without changing behavior") {
  Program p = parseValidated("int a; int b;\nint main() { a = 1; b = 2; print(a + b); return 0; }");
  ResilienceProfile empty;
  RunResult r1 = runProgram(p, empty, 100000, 1);
  RunResult r2 = runProgram(p, empty, 100000, 2);
  CHECK(r1.output == r2.output);
  CHECK(r1.steps == r2.steps);
  VmOptions o1;
  o1.layoutSeed = 1;
  Vm v1(p, empty, o1);
  VmOptions o2;
  o2.layoutSeed = 2;
  Vm v2(p, empty, o2);
  bool moved = false;
  for (size_t i = 0; i < p.symbols.size(); i++) {
    const SymbolPlacement* a = v1.memory().placementOf(static_cast<int>(i));
    const SymbolPlacement* b = v2.memory().placementOf(static_cast<int>(i));
    if (a->base != b->base) moved = true;
  }
  CHECK(moved);
}

TEST_CASE("step limit zero reports a timeout crash only while running") {
  Program p = parseValidated("int main() { print(1); return 0; }");
  ResilienceProfile empty;
  Vm vm(p, empty, {});
  vm.run(0);
  CHECK(vm.status() == VmStatus::Crashed);
  CHECK(vm.crashReason() == "timeout");
}

TEST_CASE("hung loops exhaust the step limit deterministically") {
  RunResult r = runSource("int main() { while (1) { ; } return 0; }", 5000);
  CHECK(r.status == VmStatus::Crashed);
  CHECK(r.reason == "timeout");
}

TEST_CASE("a detected notification on an unregistered address terminates gracefully") {
  Program p = parseValidated(
      "int x;\nint main() { int i; x = 0; for (i = 0; i < 100; i += 1) { x = x + 1; } print(x); return 0; }");
  ResilienceProfile empty;
  VmOptions opts;
  Vm vm(p, empty, opts);
  for (int i = 0; i < 10; i++) vm.step();
  const SymbolPlacement* pl = vm.findConstruct("x");
  REQUIRE(pl != nullptr);
  vm.applyFault(pl->base, 3, /*detected=*/true);
  vm.run(100000);
  CHECK(vm.status() == VmStatus::TerminatedGraceful);
}

TEST_CASE("the exit status is the value returned from main") {
  RunResult r = runSource("int main() { return 42; }");
  CHECK(r.status == VmStatus::CompletedOk);
  CHECK(r.exitValue == 42);
}

TEST_CASE("program arguments arrive through argnum") {
  Program p = parseValidated("int main() { print(argnum(0), argnum(1), argnum(7)); return 0; }");
  ResilienceProfile empty;
  RunResult r = runProgram(p, empty, 1000, 0, {3.5, 4});
  CHECK(r.output == "3.5 4 0\n");
}
