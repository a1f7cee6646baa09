#pragma once

// Embedded example algorithms: source programs, translation configs, the
// expected CSP# models, and deliberately broken model variants used to show
// the toolchain catches the usual hand-editing mistakes.

#include <string>
#include <vector>

namespace fla2csp::corpus {

struct Mutant {
  std::string name;
  bool is_syntax = true;       // false: well-formed but logically wrong
  std::string csp_text;
  int expected_error_line = 0; // syntax mutants: line where parsing must fail
  std::string note;            // what was altered
};

struct CorpusCase {
  std::string name;
  std::string python_source;
  std::string config_text;
  std::string golden_csp;
  std::vector<Mutant> mutants;
};

const std::vector<std::string>& case_names();

// Throws UnknownCase for anything not in case_names().
CorpusCase load_case(const std::string& name);

}  // namespace fla2csp::corpus
