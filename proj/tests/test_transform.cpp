#include "helpers.hpp"
#include "rolex/printer.hpp"

using namespace rolex;
using namespace rolextest;

namespace {

int countOccurrences(const std::string& text, const std::string& needle) {
  int n = 0;
  size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    n++;
    pos += needle.size();
  }
  return n;
}

}  // namespace

TEST_CASE("programs without rolex constructs transform to themselves") {
  const char* src = "int main() { int i; i = 3; print(i); return i; }";
  Program before = parseValidated(src);
  TransformResult t = transformSource(src);
  CHECK(structurallyEqual(before, t.program));
  CHECK(t.profile.records.empty());
  CHECK(serializeProfile(t.profile) == "ROLEXPROFILE 1\n");
}

TEST_CASE("robust pointer stores are triplicated and voted") {
  TransformResult t = transformSource(
      "robust (CORRECT) int* p;\n"
      "int base[8];\n"
      "int main() { int i; i = 2; p = base + i; print(*p); return 0; }\n");
  std::string out = toSource(t.program);
  CHECK(countOccurrences(out, "p__r1 = base + i") == 1);
  CHECK(countOccurrences(out, "p__r2 = base + i") == 1);
  CHECK(countOccurrences(out, "__rolex_compare(\"var:p\", p, p__r1, p__r2)") == 1);
  // replica declarations exist
  CHECK(t.program.findFunction("main") >= 0);
  int reps = 0;
  for (const auto& g : t.program.globals)
    if (g.name == "p__r1" || g.name == "p__r2") reps++;
  CHECK(reps == 2);
  // profile carries the robust record with replicas
  const ProfileRecord* r = t.profile.find("p");
  REQUIRE(r != nullptr);
  CHECK(r->kind == ProfileKind::Robust);
  CHECK(r->strength == Strength::Correct);
  CHECK(r->replicaIds == std::vector<std::string>{"p__r1", "p__r2"});
}

TEST_CASE("allocation results are aliased into replicas, not re-allocated") {
  TransformResult t = transformSource(
      "robust (DETECT) int* q;\n"
      "int main() { q = malloc(4 * sizeof(int)); q[0] = 5; print(q[0]); free(q); return 0; }\n");
  std::string out = toSource(t.program);
  CHECK(countOccurrences(out, "malloc") == 1);
  CHECK(countOccurrences(out, "q__r1 = q;") == 1);
}

TEST_CASE("detect-strength increments stay equal across replicas fault-free") {
  const char* src =
      "robust (DETECT) int x;\n"
      "int main() { x = 0; x = x + 1; x = x + 1; print(x); return 0; }\n";
  Program original = parseValidated(src);
  TransformResult t = transformSource(src);

  ResilienceProfile empty;
  RunResult plain = runProgram(original, empty);
  VmOptions opts;
  Vm vm(t.program, t.profile, opts);
  vm.run(100000);
  REQUIRE(vm.status() == VmStatus::CompletedOk);
  CHECK(vm.output() == plain.output);
  CHECK(vm.stepCount() >= plain.steps);  // redundancy never shrinks work

  const SymbolPlacement* a = vm.findConstruct("x");
  const SymbolPlacement* b = vm.findConstruct("x__r1");
  REQUIRE(a != nullptr);
  REQUIRE(b != nullptr);
  uint32_t va = 0, vb = 0;
  vm.memory().read(a->base, &va, 4);
  vm.memory().read(b->base, &vb, 4);
  CHECK(va == 2);
  CHECK(va == vb);
}

TEST_CASE("taking the address of a robust variable is a transform error") {
  Program p = parseValidated(
      "robust (DETECT) int x;\nint main() { int* q; x = 1; q = &x; return 0; }\n");
  TransformResult t = transform(std::move(p));
  REQUIRE(!t.ok());
  CHECK(t.diagnostics[0].kind == DiagKind::Transform);
  CHECK(t.diagnostics[0].message.find("address of robust") != std::string::npos);
}

TEST_CASE("recover directives outline the block and bracket it with runtime calls") {
  TransformResult t = transformSource(
      "int a;\n"
      "int main() {\n"
      "  int tmp; tmp = 0; a = 5;\n"
      "#pragma rolex recover-rollback share(a) private(tmp)\n"
      "  { tmp = a + 1; a = tmp * 2; }\n"
      "  print(a);\n"
      "  return 0;\n}\n");
  REQUIRE(t.outlinedFunctions.size() == 1);
  auto [blockId, fnName] = *t.outlinedFunctions.begin();
  CHECK(blockId == "blk:main:0");
  CHECK(fnName == "__rolex_blk_0");
  CHECK(t.icvs == std::vector<std::string>{"icv:blk:main:0"});

  std::string out = toSource(t.program);
  CHECK(countOccurrences(out, "__rolex_register(\"blk:main:0\")") == 1);
  CHECK(countOccurrences(out, "__rolex_preserve_state(\"blk:main:0\")") == 1);
  CHECK(countOccurrences(out, "__rolex_deregister(\"blk:main:0\")") == 1);
  CHECK(countOccurrences(out, "__rolex_blk_0(") >= 1);

  const ProfileRecord* rec = t.profile.find("blk:main:0");
  REQUIRE(rec != nullptr);
  CHECK(rec->kind == ProfileKind::Block);
  CHECK(rec->policy == BlockPolicy::Rollback);
  CHECK(rec->shareVars == std::vector<std::string>{"a"});
  CHECK(rec->privateVars == std::vector<std::string>{"main::tmp"});
  CHECK(rec->outlinedFn == "__rolex_blk_0");
  CHECK(rec->codeBytes > 0);

  // the outlined function exists, returns void, and contains no return
  int fi = t.program.findFunction("__rolex_blk_0");
  REQUIRE(fi >= 0);
  CHECK(t.program.functions[fi].returnType.isVoid());
  CHECK(toSource(t.program).find("__rolex_blk_0(int* __p_tmp)") == std::string::npos);
}

TEST_CASE("robust directives run the outlined block redundantly and vote compare variables") {
  const char* src =
      "int s; int t;\n"
      "int main() {\n"
      "  t = 3; s = 0;\n"
      "#pragma rolex robust correct share(t) compare(s)\n"
      "  { s = t * t; }\n"
      "  print(s);\n"
      "  return 0;\n}\n";
  TransformResult t = transformSource(src);
  std::string out = toSource(t.program);
  CHECK(countOccurrences(out, "__rolex_blk_0(") == 3);
  CHECK(countOccurrences(out, "__rolex_copy(s, s__b0r1)") == 1);
  CHECK(countOccurrences(out, "__rolex_copy(s, s__b0r2)") == 1);
  CHECK(countOccurrences(out, "__rolex_compare(\"blk:main:0\", s, s__b0r1, s__b0r2)") == 1);

  // fault-free transparency
  Program original = parseValidated(src);
  std::string why;
  CHECK_MESSAGE(equivalenceCheck(original, t.program, t.profile, {}, 100000, &why), why);
}

TEST_CASE("redundant blocks must not write shared state") {
  Program p = parseValidated(
      "int s; int g;\n"
      "int main() {\n"
      "#pragma rolex robust detect compare(s)\n"
      "  { s = 1; g = 2; }\n"
      "  return 0;\n}\n");
  TransformResult t = transform(std::move(p));
  REQUIRE(!t.ok());
  CHECK(t.diagnostics[0].message.find("writes shared variable") != std::string::npos);
}

TEST_CASE("2-D arrays and pointer locals cannot be captured") {
  Program p1 = parseValidated(
      "int main() { float m[2][2]; m[0][0] = 1.0;\n"
      "#pragma rolex recover-rollforward\n"
      "  { m[1][1] = 2.0; }\n"
      "  return 0;\n}\n");
  TransformResult t1 = transform(std::move(p1));
  REQUIRE(!t1.ok());
  CHECK(t1.diagnostics[0].message.find("2-D array") != std::string::npos);

  Program p2 = parseValidated(
      "int main() { int* p; p = malloc(sizeof(int));\n"
      "#pragma rolex recover-rollforward\n"
      "  { *p = 2; }\n"
      "  return 0;\n}\n");
  TransformResult t2 = transform(std::move(p2));
  REQUIRE(!t2.ok());
  CHECK(t2.diagnostics[0].message.find("pointer variable") != std::string::npos);
}

TEST_CASE("declare resilient ignore generates a fallback wrapper and reroutes calls") {
  TransformResult t = transformSource(
      "#pragma rolex declare resilient ignore fallback(0)\n"
      "int f(int v) { return v + 1; }\n"
      "int main() { int r; r = f(4); print(r); return 0; }\n");
  int wi = t.program.findFunction("__rolex_fn_f");
  REQUIRE(wi >= 0);
  std::string out = toSource(t.program);
  CHECK(countOccurrences(out, "r = __rolex_fn_f(4)") == 1);
  CHECK(countOccurrences(out, "__rolex_register(\"declfn:f\")") == 1);
  const ProfileRecord* rec = t.profile.find("declfn:f");
  REQUIRE(rec != nullptr);
  CHECK(rec->policy == BlockPolicy::Ignore);
  CHECK(rec->hasFallback);
  CHECK(rec->fallbackValue.value_or(-1) == 0);
  CHECK(rec->outlinedFn == "f");

  ResilienceProfile empty;
  Vm vm(t.program, t.profile, {});
  vm.run(100000);
  CHECK(vm.status() == VmStatus::CompletedOk);
  CHECK(vm.output() == "5\n");
}

TEST_CASE("declare resilient robust votes over redundant executions") {
  TransformResult t = transformSource(
      "#pragma rolex declare resilient robust (correct) fallback(9)\n"
      "int g(int v) { return v * v; }\n"
      "int main() { int r; r = g(5); print(r); return 0; }\n");
  std::string out = toSource(t.program);
  CHECK(countOccurrences(out, "__ret = g(v)") == 1);
  CHECK(countOccurrences(out, "__ret__r1 = g(v)") == 1);
  CHECK(countOccurrences(out, "__ret__r2 = g(v)") == 1);
  CHECK(countOccurrences(out, "__rolex_compare(\"declfn:g\", __ret, __ret__r1, __ret__r2)") == 1);
  Vm vm(t.program, t.profile, {});
  vm.run(100000);
  CHECK(vm.output() == "25\n");
}

TEST_CASE("profile records match the worked examples") {
  TransformResult t = transformSource(
      "tolerant (MAXIMUS = 1023) unsigned int counter;\n"
      "heal (recovery_func()) float matrix_A[4][4];\n"
      "tolerant unsigned int rgb[4][4];\n"
      "int recovery_func() { return 1; }\n"
      "int main() { counter = 1; return 0; }\n");
  std::string text = serializeProfile(t.profile);
  CHECK(text.find("TOLERANT counter U32 mask=000003ff") != std::string::npos);
  CHECK(text.find("HEAL matrix_A F32 fn=recovery_func") != std::string::npos);
  CHECK(text.find("TOLERANT rgb U32 elide=1") != std::string::npos);
  CHECK(text.substr(0, 15) == "ROLEXPROFILE 1\n");

  // parse round trip
  ResilienceProfile back = parseProfile(text);
  REQUIRE(back.records.size() == t.profile.records.size());
  CHECK(serializeProfile(back) == text);
}

TEST_CASE("every rolex-annotated construct appears exactly once in the profile") {
  TransformResult t = transformSource(
      "tolerant (PRECISION = 6) float a;\n"
      "robust (DETECT) int b;\n"
      "heal (fix()) int c[4];\n"
      "int* h;\n"
      "int fix() { return 1; }\n"
      "int main() {\n"
      "  int i;\n"
      "  tolerant (MAXIMUS = 7) unsigned int local;\n"
      "  local = 3; b = 1; a = 0.5;\n"
      "  h = rolex_malloc_tolerant(8 * sizeof(int), NULL);\n"
      "#pragma rolex recover-rollforward share(b)\n"
      "  { i = 1; }\n"
      "  return 0;\n}\n");
  int tolerant = 0, robust = 0, heal = 0, heapSites = 0, blocks = 0;
  for (const auto& r : t.profile.records) {
    switch (r.kind) {
      case ProfileKind::Tolerant: tolerant++; break;
      case ProfileKind::Robust: robust++; break;
      case ProfileKind::Heal: heal++; break;
      case ProfileKind::TolerantHeap: heapSites++; break;
      case ProfileKind::Block: blocks++; break;
      default: break;
    }
  }
  CHECK(tolerant == 3);  // a, main::local, and nothing else
  CHECK(robust == 1);
  CHECK(heal == 1);
  CHECK(heapSites == 1);
  CHECK(blocks == 1);
  CHECK(t.profile.find("main::local") != nullptr);
}

TEST_CASE("transformed programs keep fault-free behavior across the board") {
  const char* src =
      "tolerant (MAXIMUS = 255) unsigned int acc;\n"
      "robust (CORRECT) int idx;\n"
      "int data[16];\n"
      "int helper(int v) { return v * 2; }\n"
      "#pragma rolex declare resilient retry\n"
      "int stage(int v) { int w; w = helper(v); return w + 1; }\n"
      "int main() {\n"
      "  int i; acc = 0; idx = 0;\n"
      "  for (i = 0; i < 16; i += 1) { data[i] = i; }\n"
      "  while (idx < 16) {\n"
      "    int s; s = stage(data[idx]);\n"
      "    acc = acc + s;\n"
      "    idx = idx + 1;\n"
      "  }\n"
      "#pragma rolex recover-rollback share(acc)\n"
      "  { acc = acc + 100; }\n"
      "  print(acc);\n"
      "  return 0;\n}\n";
  Program original = parseValidated(src);
  TransformResult t = transformSource(src);
  std::string why;
  CHECK_MESSAGE(equivalenceCheck(original, t.program, t.profile, {}, 1000000, &why), why);
}

TEST_CASE("stripping pragmas keeps everything else") {
  const char* src =
      "tolerant unsigned int fb[4][4];\n"
      "int a;\n"
      "int main() {\n"
      "#pragma rolex recover-rollback share(a)\n"
      "  { a = 1; }\n"
      "  print(a);\n"
      "  return 0;\n}\n";
  TransformResult t = stripDirectivesOnly(parseValidated(src));
  REQUIRE(t.ok());
  std::string out = toSource(t.program);
  CHECK(out.find("#pragma") == std::string::npos);
  CHECK(out.find("tolerant") != std::string::npos);  // qualifiers stay
  CHECK(out.find("a = 1;") != std::string::npos);
  Program original = parseValidated(src);
  std::string why;
  CHECK(equivalenceCheck(original, t.program, ResilienceProfile{}, {}, 100000, &why));
}
