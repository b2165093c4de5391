#include "doctest.h"
#include "rolex/lexer.hpp"
#include "rolex/parser.hpp"
#include "rolex/printer.hpp"
#include "rolex/validate.hpp"

using namespace rolex;

namespace {

Program parseOk(const std::string& src) {
  ParseResult r = parseSource(src);
  REQUIRE_MESSAGE(r.ok(), (r.diagnostics.empty() ? "?" : r.diagnostics[0].message));
  return std::move(r.program);
}

std::vector<Diagnostic> parseErrors(const std::string& src) {
  ParseResult r = parseSource(src);
  REQUIRE(!r.ok());
  return r.diagnostics;
}

Program validated(const std::string& src) {
  Program p = parseOk(src);
  auto ds = validate(p);
  REQUIRE_MESSAGE(!hasErrors(ds), (ds.empty() ? "?" : ds[0].message));
  return p;
}

}  // namespace

TEST_CASE("tokenize splits a tolerant declaration into the expected tokens") {
  LexResult r = tokenize("tolerant (MAXIMUS = 1023) unsigned int counter;");
  REQUIRE(r.ok());
  std::vector<std::pair<TokenKind, std::string>> expect = {
      {TokenKind::Keyword, "tolerant"}, {TokenKind::Punct, "("},
      {TokenKind::Keyword, "MAXIMUS"},  {TokenKind::Punct, "="},
      {TokenKind::IntLit, "1023"},      {TokenKind::Punct, ")"},
      {TokenKind::Keyword, "unsigned"}, {TokenKind::Keyword, "int"},
      {TokenKind::Identifier, "counter"}, {TokenKind::Punct, ";"},
      {TokenKind::EndOfFile, ""},
  };
  REQUIRE(r.tokens.size() == expect.size());
  for (size_t i = 0; i < expect.size(); i++) {
    CHECK(r.tokens[i].kind == expect[i].first);
    CHECK(r.tokens[i].lexeme == expect[i].second);
  }
  CHECK(r.tokens[4].intValue == 1023);
}

TEST_CASE("tokenize of empty input yields only end-of-file") {
  LexResult r = tokenize("");
  REQUIRE(r.ok());
  CHECK(r.tokens.size() == 1);
  CHECK(r.tokens[0].kind == TokenKind::EndOfFile);
}

TEST_CASE("invalid characters are lexical errors with a position") {
  LexResult r = tokenize("int @x;");
  REQUIRE(!r.ok());
  CHECK(r.diagnostics[0].kind == DiagKind::Lexical);
  CHECK(r.diagnostics[0].pos.line == 1);
  CHECK(r.diagnostics[0].pos.col == 5);
}

TEST_CASE("unterminated string literal is rejected") {
  LexResult r = tokenize("int main() { print(\"oops); }");
  CHECK(!r.ok());
  CHECK(r.diagnostics[0].kind == DiagKind::Lexical);
}

TEST_CASE("clause words are plain identifiers outside pragmas") {
  Program p = validated("int share; int main() { share = 3; print(share); return 0; }");
  CHECK(p.globals.size() == 1);
  CHECK(p.globals[0].name == "share");
}

TEST_CASE("robust directive with strength and compare clause parses") {
  Program p = parseOk(
      "int x; int a; int b;\n"
      "int main() {\n"
      "#pragma rolex robust detect compare(x)\n"
      "  { x = a + b; }\n"
      "  return 0;\n"
      "}\n");
  const Stmt& s = *p.functions[0].body->stmts[0];
  REQUIRE(s.kind == Stmt::Kind::Directive);
  CHECK(s.directive->kind == Directive::Kind::Robust);
  CHECK(s.directive->strength == Strength::Detect);
  REQUIRE(s.directive->clauses.size() == 1);
  CHECK(s.directive->clauses[0].kind == Clause::Kind::Compare);
  CHECK(s.directive->clauses[0].vars == std::vector<std::string>{"x"});
  CHECK(s.body->stmts.size() == 1);
}

TEST_CASE("heal qualifier binds a recovery function to a declaration") {
  Program p = parseOk(
      "heal (recovery_func()) float matrix_A[4][4];\n"
      "int recovery_func() { return 1; }\n");
  REQUIRE(p.globals.size() == 1);
  CHECK(p.globals[0].qualifier.kind == Qualifier::Kind::Heal);
  CHECK(p.globals[0].qualifier.healFunction == "recovery_func");
  CHECK(p.globals[0].type.arrayDims == std::vector<int64_t>{4, 4});
}

TEST_CASE("compare clause on a recovery directive is a grammar violation") {
  auto ds = parseErrors(
      "int x;\n"
      "int main() {\n"
      "#pragma rolex recover-rollback compare(x)\n"
      "  { x = 1; }\n"
      "  return 0;\n"
      "}\n");
  CHECK(ds[0].kind == DiagKind::GrammarViolation);
}

TEST_CASE("the clause/directive legality matrix is enforced exhaustively") {
  struct DirCase {
    const char* head;
    bool legalShare, legalPrivate, legalCompare, legalReinit, legalAmeliorate,
        legalFallback, legalDefault;
  };
  const DirCase dirs[] = {
      {"recover-rollback", true, true, false, true, true, false, true},
      {"recover-rollforward", true, true, false, true, true, false, true},
      {"robust detect", true, true, true, false, false, false, true},
      {"robust correct", true, true, true, false, false, false, true},
  };
  const std::pair<const char*, int> clauses[] = {
      {"share(x)", 0},        {"private(x)", 1}, {"compare(x)", 2}, {"reinitialize(x)", 3},
      {"ameliorate(fix())", 4}, {"fallback(0)", 5},  {"default(shared)", 6},
  };
  for (const auto& d : dirs) {
    const bool legal[] = {d.legalShare,  d.legalPrivate,    d.legalCompare, d.legalReinit,
                          d.legalAmeliorate, d.legalFallback, d.legalDefault};
    for (const auto& [clause, idx] : clauses) {
      std::string src = "int x;\nint fix() { return 1; }\nint main() {\n#pragma rolex " +
                        std::string(d.head) + " " + clause + "\n  { x = 1; }\n  return 0;\n}\n";
      ParseResult r = parseSource(src);
      if (legal[idx]) {
        CHECK_MESSAGE(r.ok(), d.head, " + ", clause);
      } else {
        REQUIRE_MESSAGE(!r.ok(), d.head, " + ", clause);
        CHECK(r.diagnostics[0].kind == DiagKind::GrammarViolation);
      }
    }
  }
  // declare directives accept only fallback
  for (const auto& [clause, idx] : clauses) {
    std::string src = "int x;\nint fix() { return 1; }\n#pragma rolex declare resilient retry " +
                      std::string(clause) + "\nint f(int a) { return a; }\nint main() { return 0; }\n";
    ParseResult r = parseSource(src);
    if (idx == 5) {
      CHECK(r.ok());
    } else {
      REQUIRE(!r.ok());
      CHECK(r.diagnostics[0].kind == DiagKind::GrammarViolation);
    }
  }
}

TEST_CASE("a robust directive requires exactly one strength") {
  auto ds = parseErrors("int main() {\n#pragma rolex robust share(x)\n  { ; }\n  return 0;\n}\n");
  CHECK(ds[0].kind == DiagKind::GrammarViolation);
}

TEST_CASE("a variable may appear in at most one data clause") {
  auto ds = parseErrors(
      "int a;\nint main() {\n#pragma rolex recover-rollback share(a) private(a)\n"
      "  { a = 1; }\n  return 0;\n}\n");
  CHECK(ds[0].kind == DiagKind::GrammarViolation);
}

TEST_CASE("every section-4 listing ported to RC parses cleanly") {
  const char* listings[] = {
      // tolerance qualifiers
      "tolerant (PRECISION = 6) float low_precision_32;\n"
      "tolerant (PRECISION = 12) double low_precision_64;\n"
      "tolerant unsigned int rgb[64][64];\n"
      "tolerant (MAXIMUS = 1023) unsigned int counter;\n"
      "int main() { return 0; }\n",
      // tolerance directives
      "int a; int t;\n"
      "int main() {\n"
      "#pragma rolex recover-rollback share(a) private(t)\n"
      "  { t = a + 1; a = t; }\n"
      "#pragma rolex recover-rollforward share(a) private(t)\n"
      "  { t = a + 1; a = t; }\n"
      "  return 0;\n}\n",
      // declare directives
      "#pragma rolex declare resilient ignore fallback(0)\n"
      "int f(int v) { return v + 1; }\n"
      "#pragma rolex declare resilient retry\n"
      "int g(int v) { return v * 2; }\n"
      "int main() { int r; r = f(1); r = g(r); return r; }\n",
      // tolerant allocation routines
      "float* intermediate_sol_array;\n"
      "float* molecule_position;\n"
      "unsigned int* true_color_pixel_buffer;\n"
      "int main() {\n"
      "  intermediate_sol_array = rolex_malloc_tolerant(64 * sizeof(float), NULL);\n"
      "  molecule_position = rolex_malloc_tolerant(64 * sizeof(float), rolex_precision(6));\n"
      "  true_color_pixel_buffer = rolex_malloc_tolerant(8 * 8 * sizeof(unsigned int), "
      "rolex_precision(16777216));\n"
      "  return 0;\n}\n",
      // robust qualifiers
      "robust (CORRECT) int* csr_matrix[16];\n"
      "robust (DETECT) int* graph_edge_list[16];\n"
      "int main() { return 0; }\n",
      // robust directives and declare robust
      "int s; int t;\n"
      "#pragma rolex declare resilient robust (detect) fallback(0)\n"
      "int f(int v) { return v; }\n"
      "int main() {\n"
      "#pragma rolex robust detect share(t) compare(s)\n"
      "  { s = t + 1; }\n"
      "#pragma rolex robust correct share(t) compare(s)\n"
      "  { s = t + 2; }\n"
      "  int r; r = f(3);\n"
      "  return r;\n}\n",
      // robust allocation + validation
      "float* problem_matrix;\n"
      "int main() {\n"
      "  problem_matrix = rolex_malloc_robust(16 * sizeof(float), 3);\n"
      "  rolex_validate_robust(problem_matrix);\n"
      "  return 0;\n}\n",
      // heal qualifier
      "heal (recovery_func()) float matrix_A[8][8];\n"
      "int recovery_func() { return 1; }\n"
      "int main() { return 0; }\n",
      // amelioration directives
      "int v; int w;\n"
      "int recovery_func() { return 1; }\n"
      "int main() {\n"
      "#pragma rolex recover-rollback reinitialize(v)\n"
      "  { v = v + 1; }\n"
      "#pragma rolex recover-rollforward reinitialize(w)\n"
      "  { w = w + 1; }\n"
      "#pragma rolex recover-rollback ameliorate(recovery_func())\n"
      "  { v = v + 1; }\n"
      "#pragma rolex recover-rollforward ameliorate(recovery_func())\n"
      "  { w = w + 1; }\n"
      "  return 0;\n}\n",
      // repairable allocation + explicit heal
      "float* problem_matrix;\n"
      "int checksum_func() { return 1; }\n"
      "int main() {\n"
      "  problem_matrix = rolex_malloc_repairable(16 * sizeof(float), checksum_func);\n"
      "  rolex_ameliorate_heal(problem_matrix);\n"
      "  return 0;\n}\n",
  };
  for (const char* src : listings) {
    Program p = parseOk(src);
    auto ds = validate(p);
    CHECK_MESSAGE(!hasErrors(ds), src, " -> ", (ds.empty() ? "" : ds[0].message));
  }
}

TEST_CASE("pretty-print round trip preserves structure") {
  const char* sources[] = {
      "tolerant (MAXIMUS = 1023) unsigned int counter;\n"
      "robust (CORRECT) int* p[4];\n"
      "heal (fix()) float m[4][4];\n"
      "int fix() { return 1; }\n"
      "int f(int a, double b) { if (a > 0) { return a; } else { return 0; } }\n"
      "int main() {\n"
      "  int i;\n"
      "  for (i = 0; i < 10; i += 1) { counter = counter + 1; }\n"
      "  while (i > 0) { i = i - 1; if (i == 3) { break; } }\n"
      "#pragma rolex recover-rollback share(counter) default(shared)\n"
      "  { counter = 0; }\n"
      "#pragma rolex robust correct compare(counter)\n"
      "  { counter = counter * 2; }\n"
      "  print(\"done\", counter, 1.5, -2);\n"
      "  return 0;\n}\n",
      "#pragma rolex declare resilient robust (correct) fallback(7)\n"
      "int g(int x) { return x * x; }\n"
      "int main() { int r; r = g(2); print(r); return 0; }\n",
  };
  for (const char* src : sources) {
    Program p1 = parseOk(src);
    std::string printed = toSource(p1);
    Program p2 = parseOk(printed);
    CHECK_MESSAGE(structurallyEqual(p1, p2), "round trip failed for:\n", printed);
  }
}

TEST_CASE("branches out of a structured block are rejected") {
  Program p = parseOk(
      "int a;\n"
      "int main() {\n"
      "  int i;\n"
      "  for (i = 0; i < 4; i += 1) {\n"
      "#pragma rolex recover-rollback share(a)\n"
      "    { a = a + 1; break; }\n"
      "  }\n"
      "  return 0;\n}\n");
  auto ds = validate(p);
  REQUIRE(hasErrors(ds));
  CHECK(ds[0].message.find("branch out of structured block") != std::string::npos);
}

TEST_CASE("loops inside the block may use break freely") {
  validated(
      "int a;\n"
      "int main() {\n"
      "#pragma rolex recover-rollback share(a)\n"
      "  { int i; for (i = 0; i < 4; i += 1) { if (i == 2) { break; } a = a + i; } }\n"
      "  return 0;\n}\n");
}

TEST_CASE("return inside a structured block is rejected") {
  Program p = parseOk(
      "int a;\nint main() {\n#pragma rolex recover-rollforward share(a)\n"
      "  { return 1; }\n  return 0;\n}\n");
  auto ds = validate(p);
  REQUIRE(hasErrors(ds));
  CHECK(ds[0].message.find("branch out of structured block") != std::string::npos);
}

TEST_CASE("a program without rolex constructs validates vacuously") {
  validated("int main() { print(1 + 2); return 0; }");
}

TEST_CASE("oversized maximus is diagnosed by width arithmetic") {
  Program p = parseOk("tolerant (MAXIMUS = 5000000000) unsigned int x;\nint main() { return 0; }\n");
  auto ds = validate(p);
  REQUIRE(hasErrors(ds));
  CHECK(ds[0].message.find("maximus exceeds 32-bit range") != std::string::npos);
}

TEST_CASE("tolerance limit kinds must match the scalar kind") {
  Program p1 = parseOk("tolerant (PRECISION = 6) int x;\nint main() { return 0; }\n");
  CHECK(hasErrors(validate(p1)));
  Program p2 = parseOk("tolerant (MAXIMUS = 9) double y;\nint main() { return 0; }\n");
  CHECK(hasErrors(validate(p2)));
  Program p3 = parseOk("tolerant float* p;\nint main() { return 0; }\n");
  CHECK(hasErrors(validate(p3)));
}

TEST_CASE("heal functions must be declared int fn(void)") {
  Program p = parseOk(
      "heal (fix()) float m[4];\n"
      "void fix() { ; }\n"
      "int main() { return 0; }\n");
  CHECK(hasErrors(validate(p)));
}

TEST_CASE("clause variables must be visible at the directive") {
  Program p = parseOk(
      "int main() {\n#pragma rolex recover-rollback share(nosuch)\n  { ; }\n  return 0;\n}\n");
  CHECK(hasErrors(validate(p)));
}

TEST_CASE("clause variables cannot be shadowed inside the block") {
  Program p = parseOk(
      "int a;\nint main() {\n#pragma rolex recover-rollback share(a)\n"
      "  { int a; a = 1; }\n  return 0;\n}\n");
  auto ds = validate(p);
  REQUIRE(hasErrors(ds));
  CHECK(ds[0].message.find("shadows") != std::string::npos);
}

TEST_CASE("recursion is rejected") {
  Program p = parseOk("int f(int n) { if (n == 0) { return 1; } int r; r = f(n - 1); return r; }\n"
                      "int main() { int x; x = f(3); return x; }\n");
  CHECK(hasErrors(validate(p)));
}

TEST_CASE("print inside directive bodies is rejected") {
  Program p = parseOk(
      "int a;\nint main() {\n#pragma rolex robust correct compare(a)\n"
      "  { a = 1; print(a); }\n  return 0;\n}\n");
  CHECK(hasErrors(validate(p)));
}

TEST_CASE("pragmas end at the new-line") {
  // clause spilling onto the block line is a syntax error in the block
  ParseResult r = parseSource(
      "int a;\nint main() {\n#pragma rolex recover-rollback\nshare(a) { a = 1; }\n  return 0;\n}\n");
  CHECK(!r.ok());
}
