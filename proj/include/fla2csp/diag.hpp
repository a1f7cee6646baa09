#pragma once

#include <stdexcept>
#include <string>

namespace fla2csp {

// Base for all diagnostics carrying a source line (0 = no location).
struct Diagnostic : std::runtime_error {
  int line;
  Diagnostic(std::string msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg
                                    : std::move(msg)),
        line(line) {}
};

struct SyntaxError : Diagnostic {
  using Diagnostic::Diagnostic;
};

// Construct outside the restricted Python subset.
struct RestrictionViolation : Diagnostic {
  std::string construct;
  RestrictionViolation(std::string construct, int line = 0)
      : Diagnostic("restriction violation: " + construct, line),
        construct(std::move(construct)) {}
};

struct UnresolvedName : Diagnostic {
  std::string name;
  UnresolvedName(std::string name, int line = 0)
      : Diagnostic("unresolved name: " + name, line), name(std::move(name)) {}
};

struct ShapeConflict : Diagnostic {
  std::string channel;
  int arity1, arity2;
  ShapeConflict(std::string channel, int a1, int a2, int line = 0)
      : Diagnostic("message shape conflict on '" + channel + "': arity " +
                       std::to_string(a1) + " vs " + std::to_string(a2),
                   line),
        channel(std::move(channel)), arity1(a1), arity2(a2) {}
};

struct MissingFieldNames : Diagnostic {
  using Diagnostic::Diagnostic;
};

struct ArityMismatch : Diagnostic {
  std::string channel;
  ArityMismatch(std::string channel, int line = 0)
      : Diagnostic("channel '" + channel + "' used with conflicting message widths", line),
        channel(std::move(channel)) {}
};

struct MissingCapacity : Diagnostic {
  MissingCapacity(const std::string& list)
      : Diagnostic("no channel capacity configured for FIFO list '" + list + "'") {}
};

struct ConfigError : Diagnostic {
  using Diagnostic::Diagnostic;
};

struct EvalError : Diagnostic {
  using Diagnostic::Diagnostic;
};

struct StateLimitExceeded : Diagnostic {
  std::size_t limit;
  explicit StateLimitExceeded(std::size_t limit)
      : Diagnostic("state limit exceeded: " + std::to_string(limit)), limit(limit) {}
};

struct ReplayDivergence : Diagnostic {
  std::size_t step;
  explicit ReplayDivergence(std::size_t step)
      : Diagnostic("trace diverges at step " + std::to_string(step)), step(step) {}
};

struct UnknownCase : Diagnostic {
  explicit UnknownCase(const std::string& name)
      : Diagnostic("unknown corpus case: " + name) {}
};

}  // namespace fla2csp
