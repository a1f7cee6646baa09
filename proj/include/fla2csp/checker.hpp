#pragma once

// Explicit-state exploration of a CSP# model's interleaved node processes.
// Deterministic BFS with parent pointers, so every reported counterexample
// is a shortest trace and can be replayed step by step.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "fla2csp/cspast.hpp"

namespace fla2csp::mc {

struct TraceStep {
  int component = 0;   // node index executing the step
  std::string label;   // human-readable action, matched on replay
};

struct Verdict {
  bool holds = true;
  std::string property;
  std::vector<TraceStep> trace;  // counterexample; empty when holds
  bool has_lasso = false;        // liveness: trace tail from lasso_start repeats
  std::size_t lasso_start = 0;
  std::size_t states = 0, edges = 0;
};

struct ReplayResult {
  std::size_t steps = 0;
  bool deadlocked = false;       // no enabled action and some node unfinished
  bool all_terminated = false;
  std::map<std::string, long> scalars;  // scalar globals at the final state
};

class Explorer {
 public:
  struct Options {
    std::size_t state_limit = 10'000'000;
    bool reverse_components = false;  // audit: exploration order independence
    // Stop the search at the first deadlock. A deadlock found on a partial
    // search is still a real deadlock, so check_deadlockfree stays sound;
    // the other checks refuse to run on a partial space.
    bool stop_at_deadlock = false;
  };

  explicit Explorer(csp::CspModel model);
  Explorer(csp::CspModel model, Options opt);
  ~Explorer();

  void explore();  // idempotent; throws StateLimitExceeded past the limit
  bool partial();  // true when the search stopped early at a deadlock

  std::size_t num_states();
  std::size_t num_edges();

  Verdict check_deadlockfree();
  Verdict check_reaches(const std::string& predicate);
  Verdict check_always_eventually(const std::string& predicate);

  // Re-executes a recorded trace from the initial state, checking each step's
  // component and label. Throws ReplayDivergence on any mismatch.
  ReplayResult replay(const std::vector<TraceStep>& trace) const;

  // Audits over the explored space.
  std::size_t max_occupancy(const std::string& channel);
  // True when the variable never decreases along any explored edge.
  bool monotone_nondecreasing(const std::string& scalar_var);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fla2csp::mc
