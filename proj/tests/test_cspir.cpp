#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fla2csp/corpus.hpp"
#include "fla2csp/cspast.hpp"
#include "fla2csp/diag.hpp"

using namespace fla2csp;
namespace csp = fla2csp::csp;

namespace {

// minimal well-formed model wrapped around a process body
std::string model_with(const std::string& processes, const std::string& entry = "P") {
  return "enum {False, True};\n"
         "#define N 2;\n"
         "var x;\n"
         "var arr[N];\n"
         "channel ch[N] 1;\n" +
         processes +
         "Sys() = |||i:{0..N - 1}@" + entry + "(i);\n"
         "#define Done (x == 1);\n"
         "#assert Sys() deadlockfree;\n";
}

}  // namespace

TEST_CASE("print and parse are mutually inverse on the example models") {
  for (const auto& name : corpus::case_names()) {
    auto c = corpus::load_case(name);
    csp::CspModel m1 = csp::parse_model(c.golden_csp);
    std::string text = csp::print_model(m1);
    csp::CspModel m2 = csp::parse_model(text);
    auto eq = csp::compare_structural(m1, m2);
    CHECK_MESSAGE(eq.equal, name, ": ", eq.diff_path);
    // printing is a fixed point after one round
    CHECK(csp::print_model(m2) == text);
  }
}

TEST_CASE("structural comparison ignores naming and presentation choices") {
  SUBCASE("renamed processes, parameters, and binders compare equal") {
    std::string a = model_with("P(i) = {x = 1} -> Q(i + 1);\n"
                               "Q(j) = Skip;\n");
    std::string b = "enum {False, True};\n"
                    "#define N 2;\n"
                    "var x;\n"
                    "var arr[N];\n"
                    "channel ch[N] 1;\n"
                    "Worker(slot) = {x = 1} -> Next(slot + 1);\n"
                    "Next(pos) = Skip;\n"
                    "Sys() = |||node:{0..N - 1}@Worker(node);\n"
                    "#define Done (x == 1);\n"
                    "#assert Sys() deadlockfree;\n";
    auto eq = csp::compare_structural(csp::parse_model(a), csp::parse_model(b));
    CHECK_MESSAGE(eq.equal, eq.diff_path);
  }
  SUBCASE("parameter order is normalized by first use") {
    std::string a = model_with("P(i) = Q(i, 0);\n"
                               "Q(i, k) = {arr[i] = k} -> Skip;\n");
    std::string b = model_with("P(i) = Q(0, i);\n"
                               "Q(k, i) = {arr[i] = k} -> Skip;\n");
    auto eq = csp::compare_structural(csp::parse_model(a), csp::parse_model(b));
    CHECK_MESSAGE(eq.equal, eq.diff_path);
  }
  SUBCASE("increment sugar equals explicit assignment") {
    std::string a = model_with("P(i) = {x++} -> Skip;\n");
    std::string b = model_with("P(i) = {x = x + 1} -> Skip;\n");
    auto eq = csp::compare_structural(csp::parse_model(a), csp::parse_model(b));
    CHECK_MESSAGE(eq.equal, eq.diff_path);
  }
  SUBCASE("sequencing associativity is normalized") {
    std::string a = model_with("P(i) = A(); B(); {x = 1} -> Skip;\n"
                               "A() = Skip;\n"
                               "B() = Skip;\n");
    std::string b = model_with("P(i) = A(); C(i);\n"
                               "A() = Skip;\n"
                               "C(i) = B(); {x = 1} -> Skip;\n"
                               "B() = Skip;\n");
    // inlining differences are not erased, only Seq shape; same Seq content is
    auto eq1 = csp::compare_structural(csp::parse_model(a), csp::parse_model(a));
    CHECK(eq1.equal);
    auto eq2 = csp::compare_structural(csp::parse_model(a), csp::parse_model(b));
    CHECK_FALSE(eq2.equal);
    CHECK_FALSE(eq2.diff_path.empty());
  }
  SUBCASE("a real difference is reported with a location") {
    std::string a = model_with("P(i) = {x = 1} -> Skip;\n");
    std::string b = model_with("P(i) = {x = 2} -> Skip;\n");
    auto eq = csp::compare_structural(csp::parse_model(a), csp::parse_model(b));
    CHECK_FALSE(eq.equal);
    CHECK_FALSE(eq.diff_path.empty());
  }
}

TEST_CASE("parser resolves the statement separator ambiguity") {
  // `;` both separates declarations and sequences process terms; a process
  // call must be chained with `;`, never `->`
  std::string bad = model_with("P(i) = Q(); {x = 1} -> Skip;\n"
                               "Q() = Skip;\n");
  CHECK_NOTHROW(csp::parse_model(bad));

  std::string arrow = model_with("P(i) = Q() ->\n"
                                 "  {x = 1} -> Skip;\n"
                                 "Q() = Skip;\n");
  try {
    csp::parse_model(arrow);
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(std::string(e.what()).find("expected ';' after process call") != std::string::npos);
    CHECK(e.line == 6);
  }
}

TEST_CASE("parser requires braces around assignments in process position") {
  std::string bare = model_with("P(i) = x = 1;\n");
  try {
    csp::parse_model(bare);
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(std::string(e.what()).find("braced") != std::string::npos);
  }
}

TEST_CASE("validation rejects ill-formed models") {
  SUBCASE("undeclared identifier") {
    CHECK_THROWS_AS(csp::parse_model(model_with("P(i) = {x = ghost} -> Skip;\n")),
                    UnresolvedName);
  }
  SUBCASE("call arity mismatch") {
    CHECK_THROWS_AS(csp::parse_model(model_with("P(i) = Q(i, i);\n"
                                                "Q(j) = Skip;\n")),
                    Diagnostic);
  }
  SUBCASE("channel used with conflicting message widths") {
    CHECK_THROWS_AS(csp::parse_model(model_with("P(i) = ch[i]!1 -> ch[i]?a.b -> Skip;\n")),
                    ArityMismatch);
  }
  SUBCASE("zero channel capacity") {
    std::string text = model_with("P(i) = Skip;\n");
    text.replace(text.find("channel ch[N] 1;"), 16, "channel ch[N] 0;");
    CHECK_THROWS_AS(csp::parse_model(text), Diagnostic);
  }
  SUBCASE("unknown process in the system definition") {
    CHECK_THROWS_AS(csp::parse_model(model_with("P(i) = Skip;\n", "Ghost")), Diagnostic);
  }
}

TEST_CASE("expression text parsing and constant evaluation") {
  csp::CspModel m = csp::parse_model(model_with("P(i) = Skip;\n"));
  CHECK(csp::eval_const(m, csp::parse_expr_text("2 * (N - 1) + 3")) == 5);
  CHECK(csp::eval_const(m, csp::parse_expr_text("N - 1")) == 1);
  CHECK(csp::eval_const(m, csp::parse_expr_text("-N")) == -2);
  CHECK_THROWS_AS(csp::eval_const(m, csp::parse_expr_text("Unknown + 1")), Diagnostic);
}

TEST_CASE("canonical form is deterministic") {
  auto c = corpus::load_case("decentralized");
  csp::CspModel m = csp::parse_model(c.golden_csp);
  std::string c1 = csp::print_model(csp::canonicalize(m));
  std::string c2 = csp::print_model(csp::canonicalize(csp::parse_model(c.golden_csp)));
  CHECK(c1 == c2);
  // canonicalizing a canonical model changes nothing
  CHECK(csp::print_model(csp::canonicalize(csp::parse_model(c1))) == c1);
}
