#include "fla2csp/cspast.hpp"

#include <map>
#include <set>

#include "fla2csp/diag.hpp"

namespace fla2csp::csp {

ExprPtr Expr::lit(long v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Int;
  e->value = v;
  return e;
}
ExprPtr Expr::ident(std::string n) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Ident;
  e->name = std::move(n);
  return e;
}
ExprPtr Expr::index(std::string n, ExprPtr i) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Index;
  e->name = std::move(n);
  e->lhs = std::move(i);
  return e;
}
ExprPtr Expr::neg(ExprPtr x) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Neg;
  e->lhs = std::move(x);
  return e;
}
ExprPtr Expr::bin(BinOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}
ExprPtr Expr::ccount(std::string chan, ExprPtr i) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::CCount;
  e->name = std::move(chan);
  e->lhs = std::move(i);
  return e;
}

TermPtr Term::skip() {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Skip;
  return t;
}
TermPtr Term::data(std::vector<DataStmt> stmts, TermPtr cont) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::DataOp;
  t->stmts = std::move(stmts);
  t->cont = std::move(cont);
  return t;
}
TermPtr Term::out(std::string chan, ExprPtr idx, std::vector<ExprPtr> fields, TermPtr cont) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::ChanOut;
  t->chan = std::move(chan);
  t->chan_index = std::move(idx);
  t->fields = std::move(fields);
  t->cont = std::move(cont);
  return t;
}
TermPtr Term::in(std::string chan, ExprPtr idx, std::vector<std::string> binds, TermPtr cont) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::ChanIn;
  t->chan = std::move(chan);
  t->chan_index = std::move(idx);
  t->binds = std::move(binds);
  t->cont = std::move(cont);
  return t;
}
TermPtr Term::cond(ExprPtr c, TermPtr th, TermPtr el) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Cond;
  t->guard = std::move(c);
  t->then_t = std::move(th);
  t->else_t = std::move(el);
  return t;
}
TermPtr Term::call(std::string callee, std::vector<ExprPtr> args) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Call;
  t->callee = std::move(callee);
  t->args = std::move(args);
  return t;
}
TermPtr Term::seq(TermPtr a, TermPtr b) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Seq;
  t->first = std::move(a);
  t->second = std::move(b);
  return t;
}

const ProcessDef* CspModel::find_process(const std::string& name) const {
  for (const auto& p : processes)
    if (p.name == name) return &p;
  return nullptr;
}

namespace {

long eval_with(const CspModel& model, const ExprPtr& e, std::set<std::string>& active) {
  switch (e->kind) {
    case Expr::Kind::Int:
      return e->value;
    case Expr::Kind::Ident: {
      for (const auto& en : model.enums) {
        for (std::size_t i = 0; i < en.names.size(); ++i)
          if (en.names[i] == e->name) return static_cast<long>(i);
      }
      for (const auto& d : model.defines) {
        if (d.name == e->name) {
          if (!active.insert(d.name).second)
            throw EvalError("cyclic define: " + d.name);
          long v = eval_with(model, d.value, active);
          active.erase(d.name);
          return v;
        }
      }
      throw EvalError("not a constant: " + e->name);
    }
    case Expr::Kind::Neg:
      return -eval_with(model, e->lhs, active);
    case Expr::Kind::Binary: {
      long l = eval_with(model, e->lhs, active);
      long r = eval_with(model, e->rhs, active);
      switch (e->op) {
        case BinOp::Add: return l + r;
        case BinOp::Sub: return l - r;
        case BinOp::Mul: return l * r;
        case BinOp::Eq: return l == r;
        case BinOp::Ne: return l != r;
        case BinOp::Lt: return l < r;
        case BinOp::Le: return l <= r;
        case BinOp::Gt: return l > r;
        case BinOp::Ge: return l >= r;
      }
      throw EvalError("bad operator");
    }
    default:
      throw EvalError("not a constant expression");
  }
}

}  // namespace

long eval_const(const CspModel& model, const ExprPtr& e) {
  std::set<std::string> active;
  return eval_with(model, e, active);
}

}  // namespace fla2csp::csp
