#include <sstream>

#include "fla2csp/cspast.hpp"

namespace fla2csp::csp {

namespace {

int prec(BinOp op) {
  switch (op) {
    case BinOp::Mul: return 3;
    case BinOp::Add:
    case BinOp::Sub: return 2;
    default: return 1;  // comparisons
  }
}

const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
  }
  return "?";
}

void print_expr(std::ostream& os, const ExprPtr& e, int parent_prec) {
  switch (e->kind) {
    case Expr::Kind::Int:
      os << e->value;
      break;
    case Expr::Kind::Ident:
      os << e->name;
      break;
    case Expr::Kind::Index:
      os << e->name << '[';
      print_expr(os, e->lhs, 0);
      os << ']';
      break;
    case Expr::Kind::Neg:
      os << '-';
      print_expr(os, e->lhs, 4);
      break;
    case Expr::Kind::CCount:
      os << "call(ccount, " << e->name << '[';
      print_expr(os, e->lhs, 0);
      os << "])";
      break;
    case Expr::Kind::Binary: {
      int p = prec(e->op);
      bool paren = p < parent_prec;
      if (paren) os << '(';
      print_expr(os, e->lhs, p);
      os << ' ' << op_text(e->op) << ' ';
      print_expr(os, e->rhs, p + 1);  // left associative
      if (paren) os << ')';
      break;
    }
  }
}

std::string expr_text(const ExprPtr& e) {
  std::ostringstream os;
  print_expr(os, e, 0);
  return os.str();
}

// Dotted message fields: parenthesize anything non-atomic.
std::string field_text(const ExprPtr& e) {
  if (e->kind == Expr::Kind::Int || e->kind == Expr::Kind::Ident ||
      e->kind == Expr::Kind::Index)
    return expr_text(e);
  return "(" + expr_text(e) + ")";
}

void print_data_stmt(std::ostream& os, const DataStmt& s) {
  os << s.target;
  if (s.index) {
    os << '[';
    print_expr(os, s.index, 0);
    os << ']';
  }
  switch (s.kind) {
    case DataStmt::Kind::Incr: os << "++"; break;
    case DataStmt::Kind::Decr: os << "--"; break;
    case DataStmt::Kind::Assign:
      os << " = ";
      print_expr(os, s.value, 0);
      break;
  }
}

void indent(std::ostream& os, int n) {
  for (int i = 0; i < n; ++i) os << "  ";
}

void print_term(std::ostream& os, const TermPtr& t, int depth) {
  switch (t->kind) {
    case Term::Kind::Skip:
      indent(os, depth);
      os << "Skip";
      break;
    case Term::Kind::DataOp: {
      indent(os, depth);
      os << '{';
      for (std::size_t i = 0; i < t->stmts.size(); ++i) {
        if (i) os << "; ";
        print_data_stmt(os, t->stmts[i]);
      }
      os << "} ->\n";
      print_term(os, t->cont, depth);
      break;
    }
    case Term::Kind::ChanOut: {
      indent(os, depth);
      os << t->chan << '[';
      print_expr(os, t->chan_index, 0);
      os << "]!";
      for (std::size_t i = 0; i < t->fields.size(); ++i) {
        if (i) os << '.';
        os << field_text(t->fields[i]);
      }
      os << " ->\n";
      print_term(os, t->cont, depth);
      break;
    }
    case Term::Kind::ChanIn: {
      indent(os, depth);
      os << t->chan << '[';
      print_expr(os, t->chan_index, 0);
      os << "]?";
      for (std::size_t i = 0; i < t->binds.size(); ++i) {
        if (i) os << '.';
        os << t->binds[i];
      }
      os << " ->\n";
      print_term(os, t->cont, depth);
      break;
    }
    case Term::Kind::Cond: {
      indent(os, depth);
      os << "if (";
      print_expr(os, t->guard, 0);
      os << ") {\n";
      print_term(os, t->then_t, depth + 1);
      os << '\n';
      indent(os, depth);
      os << '}';
      if (t->else_t) {
        os << " else {\n";
        print_term(os, t->else_t, depth + 1);
        os << '\n';
        indent(os, depth);
        os << '}';
      }
      break;
    }
    case Term::Kind::Call: {
      indent(os, depth);
      os << t->callee << '(';
      for (std::size_t i = 0; i < t->args.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, t->args[i], 0);
      }
      os << ')';
      break;
    }
    case Term::Kind::Seq:
      print_term(os, t->first, depth);
      os << ";\n";
      print_term(os, t->second, depth);
      break;
  }
}

}  // namespace

std::string print_model(const CspModel& model) {
  std::ostringstream os;
  for (const auto& en : model.enums) {
    os << "enum {";
    for (std::size_t i = 0; i < en.names.size(); ++i) {
      if (i) os << ", ";
      os << en.names[i];
    }
    os << "};\n";
  }
  for (const auto& d : model.defines)
    os << "#define " << d.name << ' ' << expr_text(d.value) << ";\n";
  for (const auto& v : model.vars) {
    os << "var " << v.name;
    if (v.size) os << '[' << expr_text(v.size) << ']';
    if (v.init) os << " = " << expr_text(v.init);
    os << ";\n";
  }
  for (const auto& c : model.channels)
    os << "channel " << c.name << '[' << expr_text(c.size) << "] "
       << expr_text(c.capacity) << ";\n";
  for (const auto& p : model.processes) {
    os << p.name << '(';
    for (std::size_t i = 0; i < p.params.size(); ++i) {
      if (i) os << ", ";
      os << p.params[i];
    }
    os << ") =\n";
    print_term(os, p.body, 1);
    os << ";\n";
  }
  if (model.system) {
    const auto& s = *model.system;
    os << s.name << "() = |||" << s.binder << ":{" << expr_text(s.lo) << ".."
       << expr_text(s.hi) << "}@" << s.callee << '(';
    for (std::size_t i = 0; i < s.args.size(); ++i) {
      if (i) os << ", ";
      os << expr_text(s.args[i]);
    }
    os << ");\n";
  }
  for (const auto& p : model.predicates)
    os << "#define " << p.name << " (" << expr_text(p.expr) << ");\n";
  for (const auto& a : model.assertions) {
    os << "#assert " << a.system << "() ";
    switch (a.kind) {
      case Assertion::Kind::DeadlockFree: os << "deadlockfree"; break;
      case Assertion::Kind::Reaches: os << "reaches " << a.predicate; break;
      case Assertion::Kind::AlwaysEventually: os << "|= []<> " << a.predicate; break;
    }
    os << ";\n";
  }
  return os.str();
}

}  // namespace fla2csp::csp
