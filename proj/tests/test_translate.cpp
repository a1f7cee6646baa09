#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "fla2csp/corpus.hpp"
#include "fla2csp/cspast.hpp"
#include "fla2csp/diag.hpp"
#include "fla2csp/translate.hpp"
#include "gen.hpp"

using namespace fla2csp;
namespace csp = fla2csp::csp;
namespace xlate = fla2csp::xlate;

TEST_CASE("translation reproduces the expected models for both example cases") {
  for (const auto& name : corpus::case_names()) {
    auto c = corpus::load_case(name);
    auto cfg = xlate::TranslationConfig::parse(c.config_text);
    csp::CspModel translated = xlate::translate_source(c.python_source, cfg);
    csp::CspModel golden = csp::parse_model(c.golden_csp);
    auto eq = csp::compare_structural(translated, golden);
    CHECK_MESSAGE(eq.equal, name, ": ", eq.diff_path);
  }
}

TEST_CASE("translation output is byte-deterministic") {
  auto c = corpus::load_case("decentralized");
  auto cfg = xlate::TranslationConfig::parse(c.config_text);
  std::string a = csp::print_model(xlate::translate_source(c.python_source, cfg));
  std::string b = csp::print_model(xlate::translate_source(c.python_source, cfg));
  CHECK(a == b);
}

TEST_CASE("messaging helpers are emitted once regardless of call count") {
  std::string src =
      "def algo(nodeId, localData, privateData):\n"
      "    broadcastMsg(addresses, localData, nodeId)\n"
      "    broadcastMsg(addresses, localData, nodeId)\n"
      "    msgs = rcvMsgs(noNodes - 1)\n"
      "    msgs = rcvMsgs(noNodes - 1)\n"
      "    terminated = 1\n";
  xlate::TranslationConfig cfg;
  cfg.no_nodes = 3;
  cfg.fl_srv_id = 0;
  cfg.no_iterations = 1;
  csp::CspModel m = xlate::translate_source(src, cfg);
  int broadcast = 0, rcv = 0;
  for (const auto& p : m.processes) {
    if (p.name == "BroadcastMsg") ++broadcast;
    if (p.name == "RcvMsgs") ++rcv;
  }
  CHECK(broadcast == 1);
  CHECK(rcv == 1);
}

TEST_CASE("translated models carry the three standard assertions") {
  auto c = corpus::load_case("centralized");
  auto cfg = xlate::TranslationConfig::parse(c.config_text);
  csp::CspModel m = xlate::translate_source(c.python_source, cfg);
  REQUIRE(m.assertions.size() == 3);
  CHECK(m.assertions[0].kind == csp::Assertion::Kind::DeadlockFree);
  CHECK(m.assertions[1].kind == csp::Assertion::Kind::Reaches);
  CHECK(m.assertions[1].predicate == "Terminated");
  CHECK(m.assertions[2].kind == csp::Assertion::Kind::AlwaysEventually);
  CHECK(m.system.has_value());
  CHECK(m.system->name == "SysCentralized");
}

TEST_CASE("config parsing") {
  SUBCASE("full round trip") {
    auto c = corpus::load_case("decentralized");
    auto cfg = xlate::TranslationConfig::parse(c.config_text);
    CHECK(cfg.no_nodes == 3);
    CHECK(cfg.no_iterations == 3);
    CHECK_FALSE(cfg.fl_srv_id.has_value());
    CHECK(cfg.node_channel_capacity == "2 * (NoNodes - 1)");
    CHECK(cfg.system_name == "SysDecentralized");
    CHECK(cfg.fifo_capacity("dataFromClients1") == "NoNodes - 1");
    auto again = xlate::TranslationConfig::parse(cfg.to_text());
    CHECK(again.to_text() == cfg.to_text());
  }
  SUBCASE("missing node count") {
    CHECK_THROWS_AS(xlate::TranslationConfig::parse("no_iterations = 3\n"), ConfigError);
  }
  SUBCASE("missing iteration count") {
    CHECK_THROWS_AS(xlate::TranslationConfig::parse("no_nodes = 3\n"), ConfigError);
  }
  SUBCASE("unknown key") {
    CHECK_THROWS_AS(
        xlate::TranslationConfig::parse("no_nodes = 3\nno_iterations = 1\nbogus = 1\n"),
        ConfigError);
  }
  SUBCASE("out-of-range values") {
    CHECK_THROWS_AS(xlate::TranslationConfig::parse("no_nodes = 0\nno_iterations = 1\n"),
                    ConfigError);
    CHECK_THROWS_AS(xlate::TranslationConfig::parse("no_nodes = 3\nno_iterations = -1\n"),
                    ConfigError);
  }
  SUBCASE("comments and blank lines are ignored") {
    auto cfg = xlate::TranslationConfig::parse("# settings\n\nno_nodes = 2\nno_iterations = 1\n");
    CHECK(cfg.no_nodes == 2);
  }
}

TEST_CASE("fifo lists require a configured capacity") {
  auto c = corpus::load_case("decentralized");
  auto cfg = xlate::TranslationConfig::parse(c.config_text);
  cfg.fifo_capacities.clear();
  CHECK_THROWS_AS(xlate::translate_source(c.python_source, cfg), MissingCapacity);
}

TEST_CASE("server-relative programs need a server id") {
  std::string src =
      "def algo(nodeId, localData, privateData):\n"
      "    sendMsg(flSrvAddress, localData)\n"
      "    terminated = 1\n";
  xlate::TranslationConfig cfg;
  cfg.no_nodes = 2;
  cfg.no_iterations = 1;
  CHECK_THROWS_AS(xlate::translate_source(src, cfg), Diagnostic);
  cfg.fl_srv_id = 0;
  CHECK_NOTHROW(xlate::translate_source(src, cfg));
}

TEST_CASE("random subset programs translate, validate, and round-trip") {
  testgen::Generator gen(20260824);
  for (int i = 0; i < 100; ++i) {
    testgen::RandomProgram p = gen.next();
    CAPTURE(p.source);
    csp::CspModel m = xlate::translate_source(p.source, p.config);
    // emitted text parses back (validation included) to the same model
    std::string text = csp::print_model(m);
    csp::CspModel back = csp::parse_model(text);
    auto eq = csp::compare_structural(m, back);
    CHECK_MESSAGE(eq.equal, eq.diff_path);
  }
}

TEST_CASE("translated names never collide with generated helper names") {
  testgen::Generator gen(7);
  std::set<std::string> reserved = {"BroadcastMsg", "BroadcastMsgT", "RcvMsgs",
                                    "RcvMsgsT", "ClearBuffT"};
  for (int i = 0; i < 25; ++i) {
    testgen::RandomProgram p = gen.next();
    csp::CspModel m = xlate::translate_source(p.source, p.config);
    std::set<std::string> proc_names;
    for (const auto& pr : m.processes) CHECK(proc_names.insert(pr.name).second);
    // helper processes appear at most once each
    for (const auto& r : reserved) CHECK(proc_names.count(r) <= 1);
  }
}
