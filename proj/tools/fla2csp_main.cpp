// Command-line front end: translate restricted Python FL algorithms to CSP#,
// check models, and work with the embedded example corpus.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fla2csp/checker.hpp"
#include "fla2csp/corpus.hpp"
#include "fla2csp/cspast.hpp"
#include "fla2csp/diag.hpp"
#include "fla2csp/pyast.hpp"
#include "fla2csp/translate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;       // unreadable/unparseable input
constexpr int kExitTranslate = 3;   // config or translation failure
constexpr int kExitViolation = 4;   // some assertion does not hold
constexpr int kExitStateLimit = 5;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fla2csp::Diagnostic("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fla2csp::Diagnostic("cannot write file: " + path);
  out << text;
}

void print_trace(std::ostream& os, const fla2csp::mc::Verdict& v, const char* heading) {
  if (v.trace.empty()) return;
  os << heading << " (" << v.trace.size() << " steps):\n";
  for (std::size_t i = 0; i < v.trace.size(); ++i) {
    os << "  " << i + 1 << ". [n" << v.trace[i].component << "] " << v.trace[i].label;
    if (v.has_lasso && i == v.lasso_start) os << "   <- loop starts here";
    os << "\n";
  }
  if (v.has_lasso) os << "  (steps " << v.lasso_start + 1 << ".." << v.trace.size()
                      << " repeat forever)\n";
}

// Runs every assertion of the model; returns the worst exit code.
int check_model(const fla2csp::csp::CspModel& model, std::size_t limit, std::ostream& os) {
  namespace mc = fla2csp::mc;
  mc::Explorer::Options opt;
  opt.state_limit = limit;
  mc::Explorer ex(model, opt);
  auto t0 = std::chrono::steady_clock::now();
  ex.explore();
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  os << "states: " << ex.num_states() << "\n";
  os << "edges: " << ex.num_edges() << "\n";
  std::cerr << "exploration time: " << ms << " ms\n";

  int exit = kExitOk;
  for (const auto& a : model.assertions) {
    mc::Verdict v;
    std::string text;
    switch (a.kind) {
      case fla2csp::csp::Assertion::Kind::DeadlockFree:
        v = ex.check_deadlockfree();
        text = a.system + "() deadlockfree";
        break;
      case fla2csp::csp::Assertion::Kind::Reaches:
        v = ex.check_reaches(a.predicate);
        text = a.system + "() reaches " + a.predicate;
        break;
      case fla2csp::csp::Assertion::Kind::AlwaysEventually:
        v = ex.check_always_eventually(a.predicate);
        text = a.system + "() |= []<> " + a.predicate;
        break;
    }
    os << "assert " << text << ": " << (v.holds ? "VALID" : "VIOLATED") << "\n";
    if (!v.holds) {
      exit = kExitViolation;
      print_trace(os, v, "counterexample");
    }
  }
  return exit;
}

fla2csp::csp::CspModel translate_files(const std::string& input, const std::string& config) {
  std::string src = read_file(input);
  std::string cfg_text = read_file(config);
  auto cfg = fla2csp::xlate::TranslationConfig::parse(cfg_text);
  return fla2csp::xlate::translate_source(src, cfg);
}

int run_verify_corpus(std::size_t limit, const std::string& only_case, std::ostream& os) {
  namespace csp = fla2csp::csp;
  namespace mc = fla2csp::mc;
  bool all_ok = true;
  if (!only_case.empty()) fla2csp::corpus::load_case(only_case);  // reject unknown names
  for (const auto& name : fla2csp::corpus::case_names()) {
    if (!only_case.empty() && name != only_case) continue;
    auto c = fla2csp::corpus::load_case(name);
    os << "case " << name << ":\n";

    auto cfg = fla2csp::xlate::TranslationConfig::parse(c.config_text);
    csp::CspModel translated = fla2csp::xlate::translate_source(c.python_source, cfg);
    csp::CspModel golden = csp::parse_model(c.golden_csp);
    auto eq = csp::compare_structural(translated, golden);
    os << "  translation matches expected model: " << (eq.equal ? "yes" : "no") << "\n";
    if (!eq.equal) {
      os << "    first difference: " << eq.diff_path << "\n";
      all_ok = false;
    }

    mc::Explorer::Options opt;
    opt.state_limit = limit;
    mc::Explorer ex(golden, opt);
    bool dl = ex.check_deadlockfree().holds;
    bool rc = ex.check_reaches("Terminated").holds;
    bool ae = ex.check_always_eventually("Terminated").holds;
    os << "  expected model verifies (" << ex.num_states() << " states): "
       << (dl && rc && ae ? "yes" : "no") << "\n";
    if (!(dl && rc && ae)) all_ok = false;

    for (const auto& m : c.mutants) {
      if (m.is_syntax) {
        bool rejected = false;
        int line = 0;
        try {
          csp::parse_model(m.csp_text);
        } catch (const fla2csp::Diagnostic& d) {
          rejected = true;
          line = d.line;
        }
        bool ok = rejected && line == m.expected_error_line;
        os << "  mutant " << m.name << ": "
           << (ok ? "rejected at line " + std::to_string(line)
                  : rejected ? "rejected at line " + std::to_string(line) + " (expected " +
                                   std::to_string(m.expected_error_line) + ")"
                             : "accepted (expected rejection)")
           << "\n";
        if (!ok) all_ok = false;
      } else {
        csp::CspModel mm = csp::parse_model(m.csp_text);
        // A deadlock is already a violation, so stop at the first one instead
        // of searching a mutant's (possibly much larger) full state space.
        mc::Explorer::Options mopt = opt;
        mopt.stop_at_deadlock = true;
        mc::Explorer mex(mm, mopt);
        bool violated = !mex.check_deadlockfree().holds;
        if (!violated && !mex.partial())
          violated = !mex.check_reaches("Terminated").holds ||
                     !mex.check_always_eventually("Terminated").holds;
        os << "  mutant " << m.name << ": "
           << (violated ? "violates at least one assertion" : "verifies (expected violation)")
           << "\n";
        if (!violated) all_ok = false;
      }
    }
  }
  os << (all_ok ? "corpus: OK" : "corpus: FAILED") << "\n";
  return all_ok ? kExitOk : 1;
}

int run_export(const std::string& name, const std::string& dir, bool force) {
  auto c = fla2csp::corpus::load_case(name);
  std::error_code ec;
  if (!force && std::filesystem::exists(dir, ec) &&
      !std::filesystem::is_empty(dir, ec)) {
    std::cerr << "error: directory '" << dir << "' is not empty (use --force)\n";
    return kExitInput;
  }
  std::filesystem::create_directories(dir, ec);
  write_file(dir + "/" + name + ".py", c.python_source);
  write_file(dir + "/" + name + ".cfg", c.config_text);
  write_file(dir + "/" + name + ".csp", c.golden_csp);
  for (const auto& m : c.mutants)
    write_file(dir + "/" + name + "-mutant-" + m.name + ".csp", m.csp_text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Translate restricted actor-style Python FL algorithms into CSP# "
               "process models and verify them"};
  app.require_subcommand(1);

  std::string input, config, output, model_path, case_name, dir = ".";
  std::size_t limit = 10'000'000;
  bool force = false;

  auto* t = app.add_subcommand("translate", "Translate a Python program to a CSP# model");
  t->add_option("-i,--input", input, "Python source file")->required();
  t->add_option("-c,--config", config, "translation config file")->required();
  t->add_option("-o,--output", output, "output file (default: stdout)");

  auto* k = app.add_subcommand("check", "Check every assertion of a CSP# model");
  k->add_option("-m,--model", model_path, "CSP# model file")->required();
  k->add_option("-l,--state-limit", limit, "state limit");

  auto* v = app.add_subcommand("verify-corpus",
                               "Translate and verify the embedded example corpus");
  v->add_option("-l,--state-limit", limit, "state limit");
  v->add_option("--case", case_name, "verify only this case");

  auto* e = app.add_subcommand("export", "Write an embedded corpus case to disk");
  e->add_option("--case", case_name, "case name (centralized, decentralized)")->required();
  e->add_option("--dir", dir, "output directory (default: .)");
  e->add_flag("--force", force, "write into a non-empty directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (t->parsed()) {
      fla2csp::csp::CspModel m = translate_files(input, config);
      std::string text = fla2csp::csp::print_model(m);
      if (output.empty())
        std::cout << text;
      else
        write_file(output, text);
      return kExitOk;
    }
    if (k->parsed()) {
      fla2csp::csp::CspModel m = fla2csp::csp::parse_model(read_file(model_path));
      return check_model(m, limit, std::cout);
    }
    if (v->parsed()) return run_verify_corpus(limit, case_name, std::cout);
    if (e->parsed()) return run_export(case_name, dir, force);
  } catch (const fla2csp::UnknownCase& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitInput;
  } catch (const fla2csp::StateLimitExceeded& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitStateLimit;
  } catch (const fla2csp::SyntaxError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitInput;
  } catch (const fla2csp::RestrictionViolation& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitInput;
  } catch (const fla2csp::UnresolvedName& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitInput;
  } catch (const fla2csp::ShapeConflict& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitInput;
  } catch (const fla2csp::MissingFieldNames& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitInput;
  } catch (const fla2csp::ArityMismatch& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitInput;
  } catch (const fla2csp::Diagnostic& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitTranslate;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitTranslate;
  }
  return kExitOk;
}
