#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fla2csp/corpus.hpp"
#include "fla2csp/diag.hpp"
#include "fla2csp/pyast.hpp"

using namespace fla2csp;
namespace py = fla2csp::py;

namespace {

std::string wrap(const std::string& body) {
  return "def algo(nodeId, localData, privateData):\n" + body;
}

py::ValidatedProgram validate(const std::string& src) {
  return py::validate_restrictions(py::parse_program(src));
}

}  // namespace

TEST_CASE("parses the single-coordinator example program") {
  auto c = corpus::load_case("centralized");
  py::PyProgram p = py::parse_program(c.python_source);
  REQUIRE(p.functions.size() == 1);
  const py::PyFunc& f = p.functions.front();
  CHECK(f.name == "fl_centralized");
  REQUIRE(f.params.size() == 3);
  CHECK(f.params[0] == "nodeId");

  // body: for-loop then the terminated flag
  REQUIRE(f.body.size() == 2);
  CHECK(f.body[0].kind == py::Stmt::Kind::ForRange);
  CHECK(f.body[0].counter == "k");
  CHECK(f.body[1].kind == py::Stmt::Kind::Assign);
  CHECK(f.body[1].target == "terminated");

  REQUIRE(f.body[0].body.size() == 1);
  const py::Stmt& branch = f.body[0].body[0];
  REQUIRE(branch.kind == py::Stmt::Kind::If);
  REQUIRE(branch.then_body.size() == 2);
  CHECK(branch.then_body[0].mpapi.kind == py::MpapiCall::Kind::Broadcast);
  CHECK(branch.then_body[1].mpapi.kind == py::MpapiCall::Kind::RecvMulti);
  REQUIRE(branch.else_body.size() == 2);
  CHECK(branch.else_body[0].mpapi.kind == py::MpapiCall::Kind::Recv);
  CHECK(branch.else_body[0].mpapi.result == "msg");
  CHECK(branch.else_body[1].mpapi.kind == py::MpapiCall::Kind::Send);
}

TEST_CASE("splits leading integer assignments into field indices and constants") {
  auto c = corpus::load_case("decentralized");
  py::PyProgram p = py::parse_program(c.python_source);
  REQUIRE(p.field_index_decls.size() == 4);
  CHECK(p.field_index_decls.at("msgIterNo") == 0);
  CHECK(p.field_index_decls.at("msgSeqNo") == 1);
  CHECK(p.field_index_decls.at("msgSrcAdr") == 2);
  CHECK(p.field_index_decls.at("msgData") == 3);
  REQUIRE(p.phase_constants.size() == 2);
  CHECK(p.phase_constants.at("PHASE1") == 1);
  CHECK(p.phase_constants.at("PHASE2") == 2);
}

TEST_CASE("collects FIFO lists and node-local mutable variables") {
  auto c = corpus::load_case("decentralized");
  py::ValidatedProgram vp = validate(c.python_source);
  REQUIRE(vp.fifo_lists.size() == 2);
  CHECK(vp.fifo_lists[0] == "dataFromClients1");
  CHECK(vp.fifo_lists[1] == "dataFromClients2");
  REQUIRE(vp.mutable_vars.size() == 1);
  CHECK(vp.mutable_vars[0] == "noRcvdMsgs");
}

TEST_CASE("infers message shapes per channel family") {
  SUBCASE("single-field messages get the default binder name") {
    auto c = corpus::load_case("centralized");
    py::MessageShapeMap shapes = py::infer_message_shapes(validate(c.python_source));
    REQUIRE(shapes.count("nodeChannels") == 1);
    CHECK(shapes.at("nodeChannels").arity == 1);
    REQUIRE(shapes.at("nodeChannels").field_names.size() == 1);
    CHECK(shapes.at("nodeChannels").field_names[0] == "msg");
  }
  SUBCASE("list messages take field names from the index declarations") {
    auto c = corpus::load_case("decentralized");
    py::MessageShapeMap shapes = py::infer_message_shapes(validate(c.python_source));
    REQUIRE(shapes.count("nodeChannels") == 1);
    const py::MessageShape& s = shapes.at("nodeChannels");
    CHECK(s.arity == 4);
    REQUIRE(s.field_names.size() == 4);
    CHECK(s.field_names[0] == "msgIterNo");
    CHECK(s.field_names[3] == "msgData");
    // FIFO stash carries whole messages, the second list only the data field
    CHECK(shapes.at("dataFromClients1").arity == 4);
    CHECK(shapes.at("dataFromClients2").arity == 1);
  }
}

TEST_CASE("rejects sources outside the restricted subset") {
  SUBCASE("tab indentation") {
    CHECK_THROWS_AS(py::parse_program("def algo(nodeId, localData, privateData):\n"
                                      "\tterminated = 1\n"),
                    RestrictionViolation);
  }
  SUBCASE("no function definition") {
    CHECK_THROWS_AS(py::parse_program("x = 1\n"), Diagnostic);
  }
  SUBCASE("nested def") {
    CHECK_THROWS_AS(py::parse_program(wrap("    def inner():\n"
                                           "        terminated = 1\n"
                                           "    terminated = 1\n")),
                    RestrictionViolation);
  }
  SUBCASE("elif") {
    CHECK_THROWS_AS(py::parse_program(wrap("    if nodeId == 0:\n"
                                           "        terminated = 1\n"
                                           "    elif nodeId == 1:\n"
                                           "        terminated = 1\n")),
                    RestrictionViolation);
  }
  SUBCASE("for over a non-range iterable") {
    CHECK_THROWS_AS(py::parse_program(wrap("    for x in items:\n"
                                           "        terminated = 1\n")),
                    RestrictionViolation);
  }
  SUBCASE("unknown function call") {
    CHECK_THROWS_AS(py::parse_program(wrap("    launchRockets()\n"
                                           "    terminated = 1\n")),
                    RestrictionViolation);
  }
  SUBCASE("broadcast with a literal address list") {
    CHECK_THROWS_AS(py::parse_program(wrap("    broadcastMsg([0, 1], localData, nodeId)\n"
                                           "    terminated = 1\n")),
                    RestrictionViolation);
  }
  SUBCASE("empty loop body") {
    CHECK_THROWS_AS(py::parse_program(wrap("    for k in range(noIterations):\n"
                                           "    terminated = 1\n")),
                    SyntaxError);
  }
}

TEST_CASE("error diagnostics carry the source line") {
  try {
    py::parse_program("def algo(nodeId, localData, privateData):\n"
                      "    terminated = 1\n"
                      "    launchRockets()\n");
    FAIL("expected a diagnostic");
  } catch (const RestrictionViolation& d) {
    CHECK(d.line == 3);
  }
}

TEST_CASE("validation rejects structurally wrong programs") {
  SUBCASE("wrong parameter count") {
    CHECK_THROWS_AS(validate("def algo(nodeId):\n    terminated = 1\n"),
                    RestrictionViolation);
  }
  SUBCASE("missing final terminated flag") {
    CHECK_THROWS_AS(validate(wrap("    sendMsg(flSrvAddress, localData)\n")),
                    RestrictionViolation);
  }
  SUBCASE("unresolved name") {
    CHECK_THROWS_AS(validate(wrap("    sendMsg(flSrvAddress, mysteryValue)\n"
                                  "    terminated = 1\n")),
                    UnresolvedName);
  }
  SUBCASE("continue outside a loop") {
    CHECK_THROWS_AS(validate(wrap("    continue\n"
                                  "    terminated = 1\n")),
                    Diagnostic);
  }
  SUBCASE("non-contiguous field index values") {
    CHECK_THROWS_AS(validate(wrap("    msgIterNo = 0\n"
                                  "    msgData = 2\n"
                                  "    msg = rcvMsg()\n"
                                  "    sendMsg(flSrvAddress, [msg[msgIterNo], msg[msgData]])\n"
                                  "    terminated = 1\n")),
                    RestrictionViolation);
  }
}

TEST_CASE("message shape conflicts are reported") {
  SUBCASE("same channel used with two message widths") {
    auto vp = validate(wrap("    sendMsg(flSrvAddress, localData)\n"
                            "    sendMsg(flSrvAddress, [localData, nodeId])\n"
                            "    terminated = 1\n"));
    CHECK_THROWS_AS(py::infer_message_shapes(vp), ShapeConflict);
  }
  SUBCASE("multi-field message without field index names") {
    auto vp = validate(wrap("    sendMsg(flSrvAddress, [localData, nodeId])\n"
                            "    msg = rcvMsg()\n"
                            "    terminated = 1\n"));
    CHECK_THROWS_AS(py::infer_message_shapes(vp), MissingFieldNames);
  }
}

TEST_CASE("configured name map extends the defaults") {
  auto m = py::default_name_map();
  CHECK(m.at("noIterations") == "NoIterations");
  CHECK(m.at("noNodes") == "NoNodes");
  CHECK(m.at("flSrvAddress") == "FlSrvId");
  m["noClusters"] = "NoClusters";
  auto vp = py::validate_restrictions(
      py::parse_program(wrap("    sendMsg(flSrvAddress, noClusters)\n"
                             "    terminated = 1\n")),
      m);
  CHECK(vp.entry().name == "algo");
}
