#pragma once

// CSP# subset AST: exactly the constructs the PAT-targeted models exercise.
// Values are immutable after construction and safe to share across threads.

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fla2csp::csp {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class BinOp { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge };

struct Expr {
  enum class Kind {
    Int,     // integer literal
    Ident,   // identifier (define, var, param, or input binding)
    Index,   // name[index]
    Neg,     // unary minus
    Binary,  // lhs op rhs
    CCount,  // call(ccount, chan[index]) -- buffered message count
  };
  Kind kind;
  long value = 0;    // Int
  std::string name;  // Ident / Index / CCount
  BinOp op{};        // Binary
  ExprPtr lhs, rhs;  // Binary; Neg and Index/CCount use lhs as operand/index

  static ExprPtr lit(long v);
  static ExprPtr ident(std::string n);
  static ExprPtr index(std::string n, ExprPtr i);
  static ExprPtr neg(ExprPtr e);
  static ExprPtr bin(BinOp op, ExprPtr l, ExprPtr r);
  static ExprPtr ccount(std::string chan, ExprPtr i);
};

// Assignment-list entries inside a `{...}` data operation.
struct DataStmt {
  enum class Kind { Assign, Incr, Decr };
  Kind kind;
  std::string target;
  ExprPtr index;  // null for scalar target
  ExprPtr value;  // Assign only
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Kind {
    Skip,
    DataOp,   // {stmts} -> cont
    ChanOut,  // chan[index]!f1.f2... -> cont
    ChanIn,   // chan[index]?b1.b2... -> cont
    Cond,     // if (cond) {then} [else {else}]
    Call,     // Proc(args)
    Seq,      // first; second
  };
  Kind kind;
  int line = 0;

  std::vector<DataStmt> stmts;  // DataOp
  std::string chan;             // ChanOut/ChanIn
  ExprPtr chan_index;
  std::vector<ExprPtr> fields;     // ChanOut
  std::vector<std::string> binds;  // ChanIn
  TermPtr cont;                    // DataOp/ChanOut/ChanIn

  ExprPtr guard;  // Cond
  TermPtr then_t;
  TermPtr else_t;  // may be null (fall-through)

  std::string callee;  // Call
  std::vector<ExprPtr> args;

  TermPtr first, second;  // Seq

  static TermPtr skip();
  static TermPtr data(std::vector<DataStmt> stmts, TermPtr cont);
  static TermPtr out(std::string chan, ExprPtr idx, std::vector<ExprPtr> fields, TermPtr cont);
  static TermPtr in(std::string chan, ExprPtr idx, std::vector<std::string> binds, TermPtr cont);
  static TermPtr cond(ExprPtr c, TermPtr t, TermPtr e);
  static TermPtr call(std::string callee, std::vector<ExprPtr> args);
  static TermPtr seq(TermPtr a, TermPtr b);
};

struct EnumDecl {
  std::vector<std::string> names;  // value = position
};

struct Define {
  std::string name;
  ExprPtr value;
};

// `#define Name (boolean expr);` used by reaches / []<> assertions.
struct PredDef {
  std::string name;
  ExprPtr expr;
};

struct VarDecl {
  std::string name;
  ExprPtr size;  // null for scalar
  ExprPtr init;  // null means 0
};

struct ChanDecl {
  std::string name;
  ExprPtr size;
  ExprPtr capacity;
};

struct ProcessDef {
  std::string name;
  std::vector<std::string> params;
  TermPtr body;
  int line = 0;
};

// Sys() = |||binder:{lo..hi}@Callee(args);
struct SystemDef {
  std::string name;
  std::string binder;
  ExprPtr lo, hi;
  std::string callee;
  std::vector<ExprPtr> args;
};

struct Assertion {
  enum class Kind { DeadlockFree, Reaches, AlwaysEventually };
  Kind kind;
  std::string system;
  std::string predicate;  // Reaches / AlwaysEventually
};

struct CspModel {
  std::vector<EnumDecl> enums;
  std::vector<Define> defines;
  std::vector<PredDef> predicates;
  std::vector<VarDecl> vars;
  std::vector<ChanDecl> channels;
  std::vector<ProcessDef> processes;
  std::optional<SystemDef> system;
  std::vector<Assertion> assertions;

  const ProcessDef* find_process(const std::string& name) const;
};

// --- operations -----------------------------------------------------------

// PAT-compatible text; byte-deterministic for a given model.
std::string print_model(const CspModel& model);

// Inverse of print_model up to canonicalization. Runs full validation:
// undeclared identifiers, call arity, channel message-width consistency.
CspModel parse_model(const std::string& text);

// Validation shared between parse_model and translator-output checks.
void validate_model(const CspModel& model);

ExprPtr parse_expr_text(const std::string& text);

// Deterministic normal form: processes ordered by first use from the system
// definition, process/param/binder names renamed positionally, parameters
// reordered by first use in the body, ++/-- rewritten to assignments, Seq
// right-nested with Skip units dropped, declarations sorted by name.
CspModel canonicalize(const CspModel& model);

struct EquivalenceReport {
  bool equal;
  std::string diff_path;  // first differing declaration or process path
};

// Structural comparison of canonical forms.
EquivalenceReport compare_structural(const CspModel& a, const CspModel& b);

// Integer value of a define-expression under the model's defines.
long eval_const(const CspModel& model, const ExprPtr& e);

}  // namespace fla2csp::csp
