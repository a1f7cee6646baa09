#pragma once

// Restricted actor-based Python subset: AST, parser, validator, and message
// shape inference. Everything outside the subset is rejected loudly.

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace fla2csp::py {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class Op { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge };

struct Expr {
  enum class Kind { Int, Name, Subscript, Binary, List, Len };
  Kind kind;
  long value = 0;            // Int
  std::string name;          // Name / Subscript base / Len list
  Op op{};                   // Binary
  ExprPtr lhs, rhs;          // Binary; Subscript index in lhs
  std::vector<ExprPtr> elems;  // List
  int line = 0;
};

struct MpapiCall {
  enum class Kind { Send, Recv, Broadcast, RecvMulti };
  Kind kind{};
  ExprPtr destination;  // Send
  ExprPtr message;      // Send / Broadcast
  ExprPtr sender;       // Broadcast
  ExprPtr count;        // RecvMulti
  std::string result;   // Recv / RecvMulti target, empty otherwise
};

struct Stmt {
  enum class Kind {
    ForRange,    // for counter in range(bound):
    While,       // while cond:
    If,          // if cond: ... [else: ...]
    Assign,      // target = value
    Mpapi,       // one of the four MPAPI calls
    ListAppend,  // list.append(value)
    ListPop,     // target = list.pop(0)
    DrainCall,   // dropMsgsFrom...(list)
    Continue,
  };
  Kind kind{};
  int line = 0;

  std::string counter;  // ForRange
  ExprPtr bound;        // ForRange
  ExprPtr cond;         // While / If
  std::vector<Stmt> body;       // ForRange / While
  std::vector<Stmt> then_body;  // If
  std::vector<Stmt> else_body;  // If

  std::string target;  // Assign / ListPop
  ExprPtr value;       // Assign / ListAppend
  std::string list;    // ListAppend / ListPop / DrainCall
  std::string drain_fn;  // DrainCall: the helper name as written

  MpapiCall mpapi;  // Mpapi
};

struct PyFunc {
  std::string name;
  std::vector<std::string> params;  // nodeId, localData, privateData roles
  std::vector<Stmt> body;
  int line = 0;
};

struct PyProgram {
  std::vector<PyFunc> functions;  // exactly one entry function
  std::map<std::string, long> field_index_decls;  // e.g. msgIterNo -> 0
  std::map<std::string, long> phase_constants;    // e.g. PHASE1 -> 1
};

// Validation artifacts layered on top of the parsed program.
struct ValidatedProgram {
  PyProgram program;
  std::vector<std::string> fifo_lists;    // declaration-by-use order
  std::vector<std::string> mutable_vars;  // node-local vars, first-assignment order
  const PyFunc& entry() const { return program.functions.front(); }
};

struct MessageShape {
  int arity = 1;
  std::vector<std::string> field_names;  // index order; {"msg"} when arity == 1
};

// Keyed by logical channel family: "nodeChannels" plus one entry per FIFO list.
using MessageShapeMap = std::map<std::string, MessageShape>;

// The default Python-constant to CSP#-define map; config entries extend it.
std::map<std::string, std::string> default_name_map();

PyProgram parse_program(const std::string& source);

ValidatedProgram validate_restrictions(const PyProgram& program,
                                       const std::map<std::string, std::string>& name_map =
                                           default_name_map());

MessageShapeMap infer_message_shapes(const ValidatedProgram& program);

}  // namespace fla2csp::py
