#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fla2csp/checker.hpp"
#include "fla2csp/corpus.hpp"
#include "fla2csp/cspast.hpp"
#include "fla2csp/diag.hpp"

using namespace fla2csp;
namespace csp = fla2csp::csp;
namespace mc = fla2csp::mc;

namespace {

csp::CspModel golden(const std::string& name) {
  return csp::parse_model(corpus::load_case(name).golden_csp);
}

}  // namespace

TEST_CASE("single flag-setting process: exact state graph") {
  // initial state, state after the write (at Skip), finished state
  csp::CspModel m = csp::parse_model(
      "enum {False, True};\n"
      "var terminated = False;\n"
      "P(i) = {terminated = True} -> Skip;\n"
      "Sys() = |||i:{0..0}@P(i);\n"
      "#define Terminated (terminated == True);\n"
      "#assert Sys() deadlockfree;\n");
  mc::Explorer ex(m);
  CHECK(ex.num_states() == 3);
  CHECK(ex.num_edges() == 2);
  CHECK(ex.check_deadlockfree().holds);
  CHECK(ex.check_reaches("Terminated").holds);
  CHECK(ex.check_always_eventually("Terminated").holds);
  CHECK(ex.monotone_nondecreasing("terminated"));
}

TEST_CASE("a full channel blocks the sender") {
  // two producers, capacity one, no consumer: the second send deadlocks
  csp::CspModel m = csp::parse_model(
      "enum {False, True};\n"
      "var terminated = False;\n"
      "channel ch[1] 1;\n"
      "P(i) = ch[0]!i -> {terminated = True} -> Skip;\n"
      "Sys() = |||i:{0..1}@P(i);\n"
      "#define Terminated (terminated == True);\n"
      "#assert Sys() deadlockfree;\n");
  mc::Explorer ex(m);
  mc::Verdict v = ex.check_deadlockfree();
  CHECK_FALSE(v.holds);
  REQUIRE_FALSE(v.trace.empty());
  CHECK(ex.max_occupancy("ch") == 1);

  SUBCASE("the counterexample replays to a deadlock") {
    mc::ReplayResult r = ex.replay(v.trace);
    CHECK(r.steps == v.trace.size());
    CHECK(r.deadlocked);
    CHECK_FALSE(r.all_terminated);
  }
  SUBCASE("a tampered label diverges at the tampered step") {
    auto bad = v.trace;
    bad.back().label = "ch[0]!99";
    CHECK_THROWS_AS(ex.replay(bad), ReplayDivergence);
    try {
      ex.replay(bad);
    } catch (const ReplayDivergence& d) {
      CHECK(d.step == bad.size() - 1);
    }
  }
  SUBCASE("a wrong component diverges too") {
    auto bad = v.trace;
    bad.front().component = 1 - bad.front().component;
    CHECK_THROWS_AS(ex.replay(bad), ReplayDivergence);
  }
}

TEST_CASE("an endless toggle violates the liveness assertion with a lasso") {
  csp::CspModel m = csp::parse_model(
      "enum {False, True};\n"
      "var terminated = False;\n"
      "var x;\n"
      "P(i) = Q();\n"
      "Q() = {x = 1 - x} -> Q();\n"
      "Sys() = |||i:{0..0}@P(i);\n"
      "#define Terminated (terminated == True);\n"
      "#assert Sys() |= []<> Terminated;\n");
  mc::Explorer ex(m);
  CHECK(ex.check_deadlockfree().holds);
  CHECK_FALSE(ex.check_reaches("Terminated").holds);
  mc::Verdict v = ex.check_always_eventually("Terminated");
  REQUIRE_FALSE(v.holds);
  CHECK(v.has_lasso);
  CHECK(v.lasso_start < v.trace.size());
  // the whole lasso (stem plus one loop unrolling) replays cleanly
  mc::ReplayResult r = ex.replay(v.trace);
  CHECK(r.steps == v.trace.size());
  CHECK_FALSE(r.deadlocked);
}

TEST_CASE("conditional without else falls through") {
  csp::CspModel m = csp::parse_model(
      "enum {False, True};\n"
      "var terminated = False;\n"
      "P(i) = if (i > 5) { {terminated = False} -> Skip }; {terminated = True} -> Skip;\n"
      "Sys() = |||i:{0..0}@P(i);\n"
      "#define Terminated (terminated == True);\n"
      "#assert Sys() reaches Terminated;\n");
  mc::Explorer ex(m);
  CHECK(ex.check_reaches("Terminated").holds);
  CHECK(ex.check_deadlockfree().holds);
}

TEST_CASE("exploration order does not change verdicts or counts") {
  for (const auto& name : {"centralized"}) {
    csp::CspModel m = golden(name);
    mc::Explorer fwd(m);
    mc::Explorer::Options rev_opt;
    rev_opt.reverse_components = true;
    mc::Explorer rev(m, rev_opt);
    CHECK(fwd.num_states() == rev.num_states());
    CHECK(fwd.num_edges() == rev.num_edges());
    CHECK(fwd.check_deadlockfree().holds == rev.check_deadlockfree().holds);
    CHECK(fwd.check_reaches("Terminated").holds == rev.check_reaches("Terminated").holds);
    CHECK(fwd.check_always_eventually("Terminated").holds ==
          rev.check_always_eventually("Terminated").holds);
  }
}

TEST_CASE("reachable-state audits on the single-coordinator model") {
  mc::Explorer ex(golden("centralized"));
  // capacity safety: channel occupancy never exceeds the declared capacity
  CHECK(ex.max_occupancy("nodeChannels") <= 2);
  CHECK(ex.max_occupancy("buffer") <= 2);
  // the done flag never goes back down once set
  CHECK(ex.monotone_nondecreasing("terminated"));
}

TEST_CASE("state limit aborts exploration") {
  mc::Explorer::Options opt;
  opt.state_limit = 10;
  mc::Explorer ex(golden("centralized"), opt);
  CHECK_THROWS_AS(ex.explore(), StateLimitExceeded);
}

TEST_CASE("early deadlock stop yields a partial but sound search") {
  csp::CspModel m = csp::parse_model(
      "enum {False, True};\n"
      "var terminated = False;\n"
      "channel ch[1] 1;\n"
      "P(i) = ch[0]!i -> {terminated = True} -> Skip;\n"
      "Sys() = |||i:{0..1}@P(i);\n"
      "#define Terminated (terminated == True);\n"
      "#assert Sys() deadlockfree;\n");
  mc::Explorer::Options opt;
  opt.stop_at_deadlock = true;
  mc::Explorer ex(m, opt);
  mc::Verdict v = ex.check_deadlockfree();
  CHECK_FALSE(v.holds);
  CHECK(ex.partial());
  mc::ReplayResult r = ex.replay(v.trace);
  CHECK(r.deadlocked);
  // checks that need the full space refuse to answer
  CHECK_THROWS_AS(ex.check_reaches("Terminated"), Diagnostic);
  CHECK_THROWS_AS(ex.check_always_eventually("Terminated"), Diagnostic);
}

TEST_CASE("pinned state-space sizes for the example models") {
  // regression baselines from the first passing exhaustive run,
  // cross-checked by order-reversed exploration
  mc::Explorer ex(golden("centralized"));
  CHECK(ex.num_states() == 5751);
  CHECK(ex.num_edges() == 15439);
}
