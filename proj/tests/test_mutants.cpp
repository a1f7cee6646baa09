#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fla2csp/checker.hpp"
#include "fla2csp/corpus.hpp"
#include "fla2csp/cspast.hpp"
#include "fla2csp/diag.hpp"

using namespace fla2csp;
namespace csp = fla2csp::csp;
namespace mc = fla2csp::mc;

TEST_CASE("the corpus carries two cases and eight mutants") {
  REQUIRE(corpus::case_names().size() == 2);
  auto cen = corpus::load_case("centralized");
  auto dec = corpus::load_case("decentralized");
  CHECK(cen.mutants.size() == 2);
  CHECK(dec.mutants.size() == 6);
  int logical = 0;
  for (const auto& m : dec.mutants)
    if (!m.is_syntax) ++logical;
  CHECK(logical == 2);
  CHECK_THROWS_AS(corpus::load_case("nonexistent"), UnknownCase);
}

TEST_CASE("every syntax mutant is rejected at its documented line") {
  for (const auto& name : corpus::case_names()) {
    auto c = corpus::load_case(name);
    for (const auto& m : c.mutants) {
      if (!m.is_syntax) continue;
      CAPTURE(name);
      CAPTURE(m.name);
      try {
        csp::parse_model(m.csp_text);
        FAIL_CHECK("mutant ", m.name, " was accepted");
      } catch (const Diagnostic& d) {
        CHECK(d.line == m.expected_error_line);
      }
    }
  }
}

TEST_CASE("every syntax mutant differs from its source model") {
  for (const auto& name : corpus::case_names()) {
    auto c = corpus::load_case(name);
    for (const auto& m : c.mutants) CHECK(m.csp_text != c.golden_csp);
  }
}

TEST_CASE("logical mutants parse cleanly but violate an assertion with a replayable trace") {
  auto c = corpus::load_case("decentralized");
  for (const auto& m : c.mutants) {
    if (m.is_syntax) continue;
    CAPTURE(m.name);
    csp::CspModel model = csp::parse_model(m.csp_text);

    mc::Explorer::Options opt;
    opt.stop_at_deadlock = true;
    mc::Explorer ex(model, opt);
    mc::Verdict v = ex.check_deadlockfree();
    if (v.holds && !ex.partial()) {
      v = ex.check_always_eventually("Terminated");
    }
    REQUIRE_FALSE(v.holds);
    REQUIRE_FALSE(v.trace.empty());

    mc::ReplayResult r = ex.replay(v.trace);
    CHECK(r.steps == v.trace.size());
    if (!v.has_lasso) {
      CHECK(r.deadlocked);
      CHECK_FALSE(r.all_terminated);
    }
  }
}
