#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  static int n = 0;
  fs::path outfile = fs::temp_directory_path() / ("fla2csp_cli_" + std::to_string(n++) + ".out");
  std::string cmd = std::string(FLA2CSP_BIN) + " " + args + " > " + outfile.string() + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream in(outfile);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  fs::remove(outfile);
  return r;
}

fs::path fresh_dir() {
  static int n = 0;
  fs::path d = fs::temp_directory_path() / ("fla2csp_cli_dir_" + std::to_string(n++));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("export then translate closes the pipeline") {
  fs::path d = fresh_dir();
  auto e = run("export --case centralized --dir " + d.string() + " --force");
  REQUIRE(e.exit_code == 0);
  CHECK(fs::exists(d / "centralized.py"));
  CHECK(fs::exists(d / "centralized.cfg"));
  CHECK(fs::exists(d / "centralized.csp"));
  CHECK(fs::exists(d / "centralized-mutant-arrow-after-broadcast-call.csp"));

  auto t = run("translate -i " + (d / "centralized.py").string() + " -c " +
               (d / "centralized.cfg").string() + " -o " + (d / "out.csp").string());
  CHECK(t.exit_code == 0);
  // checking the translated file gives the same verdicts as the exported model
  auto k = run("check -m " + (d / "out.csp").string());
  CHECK(k.exit_code == 0);
  CHECK(k.out.find("deadlockfree: VALID") != std::string::npos);
  fs::remove_all(d);
}

TEST_CASE("export refuses a non-empty directory without --force") {
  fs::path d = fresh_dir();
  write(d / "existing.txt", "keep me\n");
  auto e = run("export --case centralized --dir " + d.string());
  CHECK(e.exit_code == 2);
  auto f = run("export --case centralized --dir " + d.string() + " --force");
  CHECK(f.exit_code == 0);
  fs::remove_all(d);
}

TEST_CASE("unknown corpus case exits 2") {
  auto r = run("export --case sideways --dir .");
  CHECK(r.exit_code == 2);
}

TEST_CASE("check verdicts and exit codes") {
  fs::path d = fresh_dir();
  run("export --case centralized --dir " + d.string() + " --force");

  SUBCASE("all assertions hold: exit 0, report is byte-stable") {
    auto a = run("check -m " + (d / "centralized.csp").string());
    auto b = run("check -m " + (d / "centralized.csp").string());
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("states: 5751") != std::string::npos);
    CHECK(a.out.find("edges: 15439") != std::string::npos);
  }
  SUBCASE("violations: exit 4 with a counterexample") {
    write(d / "bad.csp",
          "enum {False, True};\n"
          "var terminated = False;\n"
          "channel ch[1] 1;\n"
          "P(i) = ch[0]!i -> {terminated = True} -> Skip;\n"
          "Sys() = |||i:{0..1}@P(i);\n"
          "#define Terminated (terminated == True);\n"
          "#assert Sys() deadlockfree;\n");
    auto r = run("check -m " + (d / "bad.csp").string());
    CHECK(r.exit_code == 4);
    CHECK(r.out.find("VIOLATED") != std::string::npos);
    CHECK(r.out.find("counterexample") != std::string::npos);
  }
  SUBCASE("state limit: exit 5") {
    auto r = run("check -m " + (d / "centralized.csp").string() + " --state-limit 10");
    CHECK(r.exit_code == 5);
  }
  SUBCASE("parse error: exit 2") {
    write(d / "broken.csp", "this is not a model\n");
    auto r = run("check -m " + (d / "broken.csp").string());
    CHECK(r.exit_code == 2);
  }
  SUBCASE("syntax mutant: exit 2") {
    auto r = run("check -m " + (d / "centralized-mutant-arrow-after-rcvmsgs-call.csp").string());
    CHECK(r.exit_code == 2);
  }
  fs::remove_all(d);
}

TEST_CASE("translate error handling") {
  fs::path d = fresh_dir();
  SUBCASE("bad python source: exit 2") {
    write(d / "bad.py", "def algo(nodeId, localData, privateData):\n    launchRockets()\n");
    write(d / "ok.cfg", "no_nodes = 2\nno_iterations = 1\n");
    auto r = run("translate -i " + (d / "bad.py").string() + " -c " + (d / "ok.cfg").string());
    CHECK(r.exit_code == 2);
  }
  SUBCASE("bad config: exit 3") {
    write(d / "ok.py", "def algo(nodeId, localData, privateData):\n    terminated = 1\n");
    write(d / "bad.cfg", "no_iterations = 1\n");
    auto r = run("translate -i " + (d / "ok.py").string() + " -c " + (d / "bad.cfg").string());
    CHECK(r.exit_code == 3);
  }
  SUBCASE("missing input file: exit 3") {
    auto r = run("translate -i " + (d / "ghost.py").string() + " -c " + (d / "ghost.cfg").string());
    CHECK(r.exit_code == 3);
  }
  fs::remove_all(d);
}

TEST_CASE("verify-corpus case filter") {
  auto r = run("verify-corpus --case centralized");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("case centralized:") != std::string::npos);
  CHECK(r.out.find("case decentralized:") == std::string::npos);
  CHECK(r.out.find("corpus: OK") != std::string::npos);

  auto bad = run("verify-corpus --case sideways");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("translate writes byte-identical output to stdout and file") {
  fs::path d = fresh_dir();
  run("export --case centralized --dir " + d.string() + " --force");
  auto s = run("translate -i " + (d / "centralized.py").string() + " -c " +
               (d / "centralized.cfg").string());
  REQUIRE(s.exit_code == 0);
  run("translate -i " + (d / "centralized.py").string() + " -c " +
      (d / "centralized.cfg").string() + " -o " + (d / "out.csp").string());
  std::ifstream in(d / "out.csp");
  std::ostringstream ss;
  ss << in.rdbuf();
  CHECK(s.out == ss.str());
  fs::remove_all(d);
}
