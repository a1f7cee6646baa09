#include "fla2csp/translate.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "fla2csp/diag.hpp"

namespace fla2csp::xlate {

using csp::BinOp;
using csp::CspModel;
using csp::DataStmt;
using csp::Expr;
using csp::ExprPtr;
using csp::Term;
using csp::TermPtr;
using py::MpapiCall;
using py::Stmt;

namespace {

std::string capitalize(const std::string& s) {
  std::string out = s;
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

BinOp map_op(py::Op op) {
  switch (op) {
    case py::Op::Add: return BinOp::Add;
    case py::Op::Sub: return BinOp::Sub;
    case py::Op::Mul: return BinOp::Mul;
    case py::Op::Eq: return BinOp::Eq;
    case py::Op::Ne: return BinOp::Ne;
    case py::Op::Lt: return BinOp::Lt;
    case py::Op::Le: return BinOp::Le;
    case py::Op::Gt: return BinOp::Gt;
    case py::Op::Ge: return BinOp::Ge;
  }
  throw EvalError("bad operator");
}

bool contains_continue(const std::vector<Stmt>& body) {
  for (const auto& s : body) {
    if (s.kind == Stmt::Kind::Continue) return true;
    if (contains_continue(s.body) || contains_continue(s.then_body) ||
        contains_continue(s.else_body))
      return true;
  }
  return false;
}

// while-guard snapshot pattern: len(list) > 0 or len(list) != 0
const std::string* drain_guard_list(const py::ExprPtr& cond) {
  if (cond->kind != py::Expr::Kind::Binary) return nullptr;
  if (cond->op != py::Op::Gt && cond->op != py::Op::Ne) return nullptr;
  if (cond->lhs->kind != py::Expr::Kind::Len) return nullptr;
  if (cond->rhs->kind != py::Expr::Kind::Int || cond->rhs->value != 0) return nullptr;
  return &cond->lhs->name;
}

struct Lowerer {
  const py::ValidatedProgram& vp;
  const TranslationConfig& cfg;
  const py::MessageShapeMap& shapes;

  std::string entry_name;
  std::vector<csp::ProcessDef> loop_procs;
  std::vector<csp::ProcessDef> helper_procs;
  std::set<std::string> helpers_emitted;
  bool uses_rcvmsgs = false;
  int loop_index = 0;   // 1 -> "T", n -> "_Phase<n>"
  int drain_index = 0;

  // Lowering environment: python name -> CSP# expression, plus message
  // binders mapped to their per-field CSP# names.
  struct Env {
    std::map<std::string, ExprPtr> names;
    std::map<std::string, std::vector<std::string>> msg_binders;
    std::string loop_proc;             // target of `continue`
    std::vector<ExprPtr> loop_args;
  };

  Lowerer(const py::ValidatedProgram& v, const TranslationConfig& c,
          const py::MessageShapeMap& s)
      : vp(v), cfg(c), shapes(s) {}

  const py::MessageShape& shape_of(const std::string& family, int line) const {
    auto it = shapes.find(family);
    if (it == shapes.end())
      throw ShapeConflict(family, 0, 0, line);
    return it->second;
  }

  bool is_mutable_var(const std::string& n) const {
    return std::find(vp.mutable_vars.begin(), vp.mutable_vars.end(), n) !=
           vp.mutable_vars.end();
  }

  ExprPtr lower_expr(const py::ExprPtr& e, const Env& env) const {
    switch (e->kind) {
      case py::Expr::Kind::Int:
        return Expr::lit(e->value);
      case py::Expr::Kind::Name: {
        auto it = env.names.find(e->name);
        if (it != env.names.end()) return it->second;
        auto mb = env.msg_binders.find(e->name);
        if (mb != env.msg_binders.end()) {
          if (mb->second.size() != 1)
            throw RestrictionViolation(
                "multi-field message '" + e->name + "' used as a scalar", e->line);
          return Expr::ident(mb->second[0]);
        }
        if (is_mutable_var(e->name))
          return Expr::index(e->name, Expr::ident("nodeId"));
        auto nm = cfg.name_map.find(e->name);
        if (nm != cfg.name_map.end()) return Expr::ident(nm->second);
        if (vp.program.phase_constants.count(e->name)) return Expr::ident(e->name);
        throw UnresolvedName(e->name, e->line);
      }
      case py::Expr::Kind::Subscript: {
        auto mb = env.msg_binders.find(e->name);
        if (mb == env.msg_binders.end())
          throw UnresolvedName(e->name, e->line);
        long idx = -1;
        if (e->lhs->kind == py::Expr::Kind::Int) {
          idx = e->lhs->value;
        } else if (e->lhs->kind == py::Expr::Kind::Name) {
          auto fi = vp.program.field_index_decls.find(e->lhs->name);
          if (fi == vp.program.field_index_decls.end())
            throw UnresolvedName(e->lhs->name, e->line);
          idx = fi->second;
        } else {
          throw RestrictionViolation("message subscript must be a field-index constant",
                                     e->line);
        }
        if (idx < 0 || idx >= static_cast<long>(mb->second.size()))
          throw RestrictionViolation("message field index out of range", e->line);
        return Expr::ident(mb->second[static_cast<std::size_t>(idx)]);
      }
      case py::Expr::Kind::Binary:
        return Expr::bin(map_op(e->op), lower_expr(e->lhs, env), lower_expr(e->rhs, env));
      case py::Expr::Kind::List:
        throw RestrictionViolation("list literal outside a message position", e->line);
      case py::Expr::Kind::Len:
        throw RestrictionViolation("len() outside a drain-loop guard", e->line);
    }
    throw EvalError("bad expression");
  }

  std::vector<ExprPtr> lower_message(const py::ExprPtr& e, const Env& env) const {
    if (e->kind == py::Expr::Kind::List) {
      std::vector<ExprPtr> out;
      for (const auto& el : e->elems) out.push_back(lower_expr(el, env));
      return out;
    }
    if (e->kind == py::Expr::Kind::Name) {
      auto mb = env.msg_binders.find(e->name);
      if (mb != env.msg_binders.end()) {
        std::vector<ExprPtr> out;
        for (const auto& n : mb->second) out.push_back(Expr::ident(n));
        return out;
      }
    }
    return {lower_expr(e, env)};
  }

  // Field binder names for a receive site: the single python binder name for
  // scalar messages, the declared field names otherwise.
  std::vector<std::string> binder_names(const std::string& family, const std::string& result,
                                        int line) const {
    const auto& sh = shape_of(family, line);
    if (sh.arity == 1) return {result.empty() ? std::string("msg") : result};
    return sh.field_names;
  }

  DataStmt lower_assign(const Stmt& s, const Env& env) const {
    DataStmt d;
    d.kind = DataStmt::Kind::Assign;
    if (s.target == "terminated") {
      d.target = "terminated";
      if (s.value->kind != py::Expr::Kind::Int || (s.value->value != 0 && s.value->value != 1))
        throw RestrictionViolation("terminated may only be assigned 0 or 1", s.line);
      d.value = Expr::ident(s.value->value == 1 ? "True" : "False");
      return d;
    }
    d.target = s.target;
    d.index = Expr::ident("nodeId");
    d.value = lower_expr(s.value, env);
    return d;
  }

  std::string next_loop_name() {
    ++loop_index;
    if (loop_index == 1) return entry_name + "T";
    return entry_name + "_Phase" + std::to_string(loop_index);
  }

  TermPtr lower_stmts(const std::vector<Stmt>& stmts, std::size_t from, TermPtr k, Env env) {
    if (from >= stmts.size()) return k;
    const Stmt& s = stmts[from];
    switch (s.kind) {
      case Stmt::Kind::Assign: {
        TermPtr rest = lower_stmts(stmts, from + 1, std::move(k), env);
        return Term::data({lower_assign(s, env)}, std::move(rest));
      }
      case Stmt::Kind::ForRange:
        return lower_for(stmts, from, std::move(k), std::move(env));
      case Stmt::Kind::While:
        return lower_while(stmts, from, std::move(k), std::move(env));
      case Stmt::Kind::If: {
        TermPtr rest_k = lower_stmts(stmts, from + 1, std::move(k), env);
        if (!s.else_body.empty() || contains_continue(s.then_body)) {
          TermPtr th = lower_stmts(s.then_body, 0, rest_k, env);
          TermPtr el = s.else_body.empty() ? rest_k : lower_stmts(s.else_body, 0, rest_k, env);
          return Term::cond(lower_expr(s.cond, env), std::move(th), std::move(el));
        }
        TermPtr th = lower_stmts(s.then_body, 0, Term::skip(), env);
        TermPtr c = Term::cond(lower_expr(s.cond, env), std::move(th), nullptr);
        if (rest_k->kind == Term::Kind::Skip) return c;
        return Term::seq(std::move(c), std::move(rest_k));
      }
      case Stmt::Kind::Continue:
        return Term::call(env.loop_proc, env.loop_args);
      case Stmt::Kind::Mpapi:
        return lower_mpapi(stmts, from, std::move(k), std::move(env));
      case Stmt::Kind::ListAppend: {
        const auto& sh = shape_of(s.list, s.line);
        auto fields = lower_message(s.value, env);
        if (static_cast<int>(fields.size()) != sh.arity)
          throw ShapeConflict(s.list, sh.arity, static_cast<int>(fields.size()), s.line);
        TermPtr rest = lower_stmts(stmts, from + 1, std::move(k), env);
        return Term::out(s.list, Expr::ident("nodeId"), std::move(fields), std::move(rest));
      }
      case Stmt::Kind::ListPop: {
        auto binds = binder_names(s.list, s.target, s.line);
        Env inner = env;
        inner.msg_binders[s.target] = binds;
        TermPtr rest = lower_stmts(stmts, from + 1, std::move(k), std::move(inner));
        return Term::in(s.list, Expr::ident("nodeId"), std::move(binds), std::move(rest));
      }
      case Stmt::Kind::DrainCall: {
        std::string helper = capitalize(s.drain_fn);
        ensure_drop_helper(helper, s.list, s.line);
        TermPtr call = Term::call(
            helper, {env.names.at("__nodeId__"),
                     Expr::ccount(s.list, env.names.at("__nodeId__"))});
        TermPtr rest = lower_stmts(stmts, from + 1, std::move(k), std::move(env));
        if (rest->kind == Term::Kind::Skip) return call;
        return Term::seq(std::move(call), std::move(rest));
      }
    }
    throw EvalError("bad statement");
  }

  TermPtr lower_mpapi(const std::vector<Stmt>& stmts, std::size_t from, TermPtr k, Env env) {
    const Stmt& s = stmts[from];
    const MpapiCall& c = s.mpapi;
    switch (c.kind) {
      case MpapiCall::Kind::Send: {
        const auto& sh = shape_of("nodeChannels", s.line);
        auto fields = lower_message(c.message, env);
        if (static_cast<int>(fields.size()) != sh.arity)
          throw ShapeConflict("nodeChannels", sh.arity, static_cast<int>(fields.size()),
                              s.line);
        // destination indexing: messages go to the destination's queue
        ExprPtr dest = lower_expr(c.destination, env);
        TermPtr rest = lower_stmts(stmts, from + 1, std::move(k), env);
        return Term::out("nodeChannels", std::move(dest), std::move(fields), std::move(rest));
      }
      case MpapiCall::Kind::Recv: {
        auto binds = binder_names("nodeChannels", c.result, s.line);
        Env inner = env;
        inner.msg_binders[c.result] = binds;
        TermPtr rest = lower_stmts(stmts, from + 1, std::move(k), std::move(inner));
        return Term::in("nodeChannels", env.names.at("__nodeId__"), std::move(binds),
                        std::move(rest));
      }
      case MpapiCall::Kind::Broadcast: {
        const auto& sh = shape_of("nodeChannels", s.line);
        auto fields = lower_message(c.message, env);
        if (static_cast<int>(fields.size()) != sh.arity)
          throw ShapeConflict("nodeChannels", sh.arity, static_cast<int>(fields.size()),
                              s.line);
        ensure_broadcast(sh.arity);
        std::vector<ExprPtr> args = fields;
        args.push_back(lower_expr(c.sender, env));
        TermPtr call = Term::call("BroadcastMsg", std::move(args));
        TermPtr rest = lower_stmts(stmts, from + 1, std::move(k), std::move(env));
        if (rest->kind == Term::Kind::Skip) return call;
        return Term::seq(std::move(call), std::move(rest));
      }
      case MpapiCall::Kind::RecvMulti: {
        const auto& sh = shape_of("nodeChannels", s.line);
        ensure_rcvmsgs(sh.arity);
        TermPtr call = Term::call(
            "RcvMsgs", {env.names.at("__nodeId__"), lower_expr(c.count, env)});
        TermPtr rest = lower_stmts(stmts, from + 1, std::move(k), std::move(env));
        if (rest->kind == Term::Kind::Skip) return call;
        return Term::seq(std::move(call), std::move(rest));
      }
    }
    throw EvalError("bad MPAPI call");
  }

  // Parameters threaded through every loop process: the entry triple plus all
  // counters currently in scope (dead ones included; the goldens thread them).
  struct Threading {
    std::vector<std::string> params;
    std::vector<ExprPtr> args;  // as seen from the creating scope
  };

  Threading base_threading(const Env& env, const std::vector<std::string>& counters) const {
    Threading t;
    t.params = {"nodeId", "ldata", "pdata"};
    t.args = {env.names.at("__nodeId__"), Expr::ident("ldata"), Expr::ident("pdata")};
    for (const auto& c : counters) {
      t.params.push_back(c);
      t.args.push_back(Expr::ident(c));
    }
    return t;
  }

  TermPtr lower_for(const std::vector<Stmt>& stmts, std::size_t from, TermPtr k, Env env) {
    const Stmt& s = stmts[from];
    std::string pname = next_loop_name();
    Threading th = base_threading(env, counters_in_scope);

    std::vector<std::string> params;
    params.push_back(s.counter);
    params.insert(params.end(), th.params.begin(), th.params.end());

    Env inner = make_proc_env(th.params);
    inner.names[s.counter] = Expr::ident(s.counter);

    std::vector<ExprPtr> self_args;
    self_args.push_back(Expr::bin(BinOp::Add, Expr::ident(s.counter), Expr::lit(1)));
    for (const auto& p : th.params) self_args.push_back(Expr::ident(p));

    inner.loop_proc = pname;
    inner.loop_args = self_args;

    counters_in_scope.push_back(s.counter);
    // statements after the loop run in the else branch, counter still bound
    TermPtr else_t = lower_stmts(stmts, from + 1, std::move(k), inner);
    TermPtr body_t = lower_stmts(s.body, 0, Term::call(pname, self_args), inner);
    counters_in_scope.pop_back();

    ExprPtr guard = Expr::bin(BinOp::Lt, Expr::ident(s.counter), lower_expr(s.bound, env));
    csp::ProcessDef def;
    def.name = pname;
    def.params = std::move(params);
    def.body = Term::cond(std::move(guard), std::move(body_t), std::move(else_t));
    loop_procs.push_back(std::move(def));

    std::vector<ExprPtr> call_args;
    call_args.push_back(Expr::lit(0));
    call_args.insert(call_args.end(), th.args.begin(), th.args.end());
    return Term::call(pname, std::move(call_args));
  }

  TermPtr lower_while(const std::vector<Stmt>& stmts, std::size_t from, TermPtr k, Env env) {
    const Stmt& s = stmts[from];
    if (const std::string* list = drain_guard_list(s.cond))
      return lower_drain(stmts, from, *list, std::move(k), std::move(env));

    std::string pname = next_loop_name();
    Threading th = base_threading(env, counters_in_scope);

    Env inner = make_proc_env(th.params);
    std::vector<ExprPtr> self_args;
    for (const auto& p : th.params) self_args.push_back(Expr::ident(p));
    inner.loop_proc = pname;
    inner.loop_args = self_args;

    TermPtr else_t = lower_stmts(stmts, from + 1, std::move(k), inner);
    TermPtr body_t = lower_stmts(s.body, 0, Term::call(pname, self_args), inner);

    // monotone-counter guard: `x != B` lowers to `x < B`
    py::ExprPtr guard_src = s.cond;
    ExprPtr guard;
    if (guard_src->kind == py::Expr::Kind::Binary && guard_src->op == py::Op::Ne) {
      guard = Expr::bin(BinOp::Lt, lower_expr(guard_src->lhs, inner),
                        lower_expr(guard_src->rhs, inner));
    } else {
      guard = lower_expr(guard_src, inner);
    }

    csp::ProcessDef def;
    def.name = pname;
    def.params = th.params;
    def.body = Term::cond(std::move(guard), std::move(body_t), std::move(else_t));
    loop_procs.push_back(std::move(def));

    return Term::call(pname, th.args);
  }

  // Counted drain of a FIFO list: the guard's len() is snapshotted once via
  // ccount at the call site and decremented through the recursion.
  TermPtr lower_drain(const std::vector<Stmt>& stmts, std::size_t from,
                      const std::string& list, TermPtr k, Env env) {
    const Stmt& s = stmts[from];
    ++drain_index;
    std::string pname = drain_index == 1 ? "DrainBuffer"
                                         : "DrainBuffer" + std::to_string(drain_index);

    // free outer locals referenced by the body, in first-use order
    std::vector<std::string> free_params;  // CSP# parameter names
    std::vector<ExprPtr> free_args;
    std::set<std::string> taken{"nodeId"};
    std::function<void(const py::ExprPtr&)> scan_e;
    std::function<void(const std::vector<Stmt>&)> scan_s;
    std::set<std::string> local_binders;
    auto consider = [&](const std::string& pyname) {
      if (cfg.name_map.count(pyname) || vp.program.phase_constants.count(pyname)) return;
      auto it = env.names.find(pyname);
      if (it == env.names.end()) return;
      if (it->second->kind != Expr::Kind::Ident) return;  // globals/arrays excluded
      const std::string& cname = it->second->name;
      if (taken.count(cname)) return;
      taken.insert(cname);
      free_params.push_back(cname);
      free_args.push_back(it->second);
    };
    scan_e = [&](const py::ExprPtr& e) {
      if (!e) return;
      if (e->kind == py::Expr::Kind::Name && !local_binders.count(e->name)) consider(e->name);
      scan_e(e->lhs);
      scan_e(e->rhs);
      for (const auto& el : e->elems) scan_e(el);
    };
    scan_s = [&](const std::vector<Stmt>& body) {
      for (const auto& st : body) {
        if (st.kind == Stmt::Kind::ListPop) local_binders.insert(st.target);
        if (st.kind == Stmt::Kind::Mpapi && !st.mpapi.result.empty())
          local_binders.insert(st.mpapi.result);
        scan_e(st.bound);
        scan_e(st.cond);
        scan_e(st.value);
        scan_e(st.mpapi.destination);
        scan_e(st.mpapi.message);
        scan_e(st.mpapi.sender);
        scan_e(st.mpapi.count);
        scan_s(st.body);
        scan_s(st.then_body);
        scan_s(st.else_body);
      }
    };
    scan_s(s.body);

    std::vector<std::string> params{"nodeId"};
    params.insert(params.end(), free_params.begin(), free_params.end());
    params.push_back("count");

    Env inner = make_proc_env(params);
    std::vector<ExprPtr> self_args;
    self_args.push_back(Expr::ident("nodeId"));
    for (const auto& p : free_params) self_args.push_back(Expr::ident(p));
    self_args.push_back(Expr::bin(BinOp::Sub, Expr::ident("count"), Expr::lit(1)));

    // map python names for the free outer locals into the helper's scope
    for (const auto& [pyname, ce] : env.names) {
      if (ce->kind == Expr::Kind::Ident && taken.count(ce->name)) inner.names[pyname] = ce;
    }

    TermPtr body_t = lower_stmts(s.body, 0, Term::call(pname, self_args), inner);
    csp::ProcessDef def;
    def.name = pname;
    def.params = std::move(params);
    def.body = Term::cond(Expr::bin(BinOp::Gt, Expr::ident("count"), Expr::lit(0)),
                          std::move(body_t), Term::skip());
    helper_procs.push_back(std::move(def));

    std::vector<ExprPtr> call_args;
    call_args.push_back(env.names.at("__nodeId__"));
    for (const auto& a : free_args) call_args.push_back(a);
    call_args.push_back(Expr::ccount(list, env.names.at("__nodeId__")));
    TermPtr call = Term::call(pname, std::move(call_args));
    TermPtr rest = lower_stmts(stmts, from + 1, std::move(k), std::move(env));
    if (rest->kind == Term::Kind::Skip) return call;
    return Term::seq(std::move(call), std::move(rest));
  }

  // fresh process-scope environment for the given CSP# parameter names
  Env make_proc_env(const std::vector<std::string>& params) const {
    Env env;
    env.names["__nodeId__"] = Expr::ident("nodeId");
    const auto& f = vp.entry();
    // map the python entry parameter names onto the canonical csp names
    const std::vector<std::string> canon{"nodeId", "ldata", "pdata"};
    for (std::size_t i = 0; i < f.params.size() && i < 3; ++i)
      env.names[f.params[i]] = Expr::ident(canon[i]);
    for (const auto& p : params)
      if (p != "nodeId" && p != "ldata" && p != "pdata") env.names[p] = Expr::ident(p);
    for (const auto& [k, v] : cfg.name_map) env.names[k] = Expr::ident(v);
    for (const auto& [k, v] : vp.program.phase_constants) {
      (void)v;
      env.names[k] = Expr::ident(k);
    }
    return env;
  }

  std::vector<std::string> counters_in_scope;

  // --- helper process templates ------------------------------------------

  static std::vector<std::string> field_params(int arity, const std::string& single,
                                               const std::string& stem) {
    if (arity == 1) return {single};
    std::vector<std::string> out;
    for (int i = 1; i <= arity; ++i) out.push_back(stem + std::to_string(i));
    return out;
  }

  void ensure_broadcast(int arity) {
    if (!helpers_emitted.insert("BroadcastMsg").second) return;
    auto fields = field_params(arity, "msg", "m");

    std::vector<std::string> bm_params = fields;
    bm_params.push_back("senderId");
    std::vector<ExprPtr> bt_args{Expr::lit(0), Expr::ident("NoNodes")};
    for (const auto& f : fields) bt_args.push_back(Expr::ident(f));
    bt_args.push_back(Expr::ident("senderId"));
    csp::ProcessDef bm;
    bm.name = "BroadcastMsg";
    bm.params = bm_params;
    bm.body = Term::call("BroadcastMsgT", bt_args);
    helper_procs.push_back(std::move(bm));

    std::vector<std::string> bt_params{"i", "noNodes"};
    bt_params.insert(bt_params.end(), fields.begin(), fields.end());
    bt_params.push_back("senderId");
    std::vector<ExprPtr> rec_args{Expr::bin(BinOp::Add, Expr::ident("i"), Expr::lit(1)),
                                  Expr::ident("noNodes")};
    for (const auto& f : fields) rec_args.push_back(Expr::ident(f));
    rec_args.push_back(Expr::ident("senderId"));
    std::vector<ExprPtr> out_fields;
    for (const auto& f : fields) out_fields.push_back(Expr::ident(f));

    TermPtr send = Term::out("nodeChannels", Expr::ident("i"), out_fields, Term::skip());
    TermPtr skip_self =
        Term::cond(Expr::bin(BinOp::Ne, Expr::ident("i"), Expr::ident("senderId")),
                   std::move(send), nullptr);
    TermPtr then_t = Term::seq(std::move(skip_self), Term::call("BroadcastMsgT", rec_args));
    csp::ProcessDef bt;
    bt.name = "BroadcastMsgT";
    bt.params = std::move(bt_params);
    bt.body = Term::cond(Expr::bin(BinOp::Lt, Expr::ident("i"), Expr::ident("noNodes")),
                         std::move(then_t), nullptr);
    helper_procs.push_back(std::move(bt));
  }

  void ensure_rcvmsgs(int arity) {
    if (!helpers_emitted.insert("RcvMsgs").second) return;
    uses_rcvmsgs = true;
    auto temps = field_params(arity, "temp", "temp");
    std::vector<ExprPtr> temp_ids;
    for (const auto& t : temps) temp_ids.push_back(Expr::ident(t));

    auto buffer_nonempty = [&] {
      return Expr::bin(BinOp::Ne, Expr::index("bufferSize", Expr::ident("nodeId")),
                       Expr::lit(0));
    };

    {
      csp::ProcessDef p;
      p.name = "RcvMsgs";
      p.params = {"nodeId", "noMsgs"};
      TermPtr clear = Term::cond(buffer_nonempty(),
                                 Term::call("ClearBuffT", {Expr::ident("nodeId")}), nullptr);
      TermPtr start = Term::call(
          "RcvMsgsT", {Expr::lit(0), Expr::ident("nodeId"), Expr::ident("noMsgs")});
      p.body = Term::seq(std::move(clear), std::move(start));
      helper_procs.push_back(std::move(p));
    }
    {
      csp::ProcessDef p;
      p.name = "ClearBuffT";
      p.params = {"nodeId"};
      DataStmt dec;
      dec.kind = DataStmt::Kind::Decr;
      dec.target = "bufferSize";
      dec.index = Expr::ident("nodeId");
      TermPtr again = Term::cond(buffer_nonempty(),
                                 Term::call("ClearBuffT", {Expr::ident("nodeId")}), nullptr);
      TermPtr recv = Term::in("buffer", Expr::ident("nodeId"), temps, std::move(again));
      p.body = Term::data({dec}, std::move(recv));
      helper_procs.push_back(std::move(p));
    }
    {
      csp::ProcessDef p;
      p.name = "RcvMsgsT";
      p.params = {"i", "nodeId", "noMsgs"};
      DataStmt inc;
      inc.kind = DataStmt::Kind::Incr;
      inc.target = "bufferSize";
      inc.index = Expr::ident("nodeId");
      TermPtr rec = Term::call(
          "RcvMsgsT", {Expr::bin(BinOp::Add, Expr::ident("i"), Expr::lit(1)),
                       Expr::ident("nodeId"), Expr::ident("noMsgs")});
      TermPtr fwd = Term::out("buffer", Expr::ident("nodeId"), temp_ids, std::move(rec));
      TermPtr recv = Term::in("nodeChannels", Expr::ident("nodeId"), temps, std::move(fwd));
      TermPtr step = Term::data({inc}, std::move(recv));
      p.body = Term::cond(Expr::bin(BinOp::Lt, Expr::ident("i"), Expr::ident("noMsgs")),
                          std::move(step), nullptr);
      helper_procs.push_back(std::move(p));
    }
  }

  // Receives and discards `count` messages from the list's channel.
  void ensure_drop_helper(const std::string& name, const std::string& list, int line) {
    if (!helpers_emitted.insert(name).second) return;
    auto binds = binder_names(list, "msg", line);
    std::vector<ExprPtr> rec_args{Expr::ident("nodeId"),
                                  Expr::bin(BinOp::Sub, Expr::ident("count"), Expr::lit(1))};
    TermPtr recv = Term::in(list, Expr::ident("nodeId"), binds, Term::call(name, rec_args));
    csp::ProcessDef p;
    p.name = name;
    p.params = {"nodeId", "count"};
    p.body = Term::cond(Expr::bin(BinOp::Gt, Expr::ident("count"), Expr::lit(0)),
                        std::move(recv), Term::skip());
    helper_procs.push_back(std::move(p));
  }

  // --- model assembly -----------------------------------------------------

  CspModel run() {
    const auto& f = vp.entry();
    entry_name = capitalize(f.name);

    Env env = make_proc_env({});
    TermPtr entry_body = lower_stmts(f.body, 0, Term::skip(), std::move(env));

    CspModel m;
    m.enums.push_back({{"False", "True"}});

    std::set<std::string> defined;
    auto add_define = [&](const std::string& name, ExprPtr value) {
      if (!defined.insert(name).second)
        throw ConfigError("duplicate define: " + name);
      m.defines.push_back({name, std::move(value)});
    };
    add_define("NoNodes", Expr::lit(cfg.no_nodes));
    if (cfg.fl_srv_id) add_define("FlSrvId", Expr::lit(*cfg.fl_srv_id));
    add_define("NoIterations", Expr::lit(cfg.no_iterations));
    for (const auto& [name, text] : cfg.extra_defines) {
      auto it = vp.program.phase_constants.find(name);
      if (it != vp.program.phase_constants.end()) continue;  // source wins below
      add_define(name, csp::parse_expr_text(text));
    }
    for (const auto& [name, value] : vp.program.phase_constants) {
      for (const auto& [cname, ctext] : cfg.extra_defines) {
        if (cname == name) {
          CspModel probe = m;
          if (csp::eval_const(probe, csp::parse_expr_text(ctext)) != value)
            throw ConfigError("config value for " + name +
                              " conflicts with the source declaration");
        }
      }
      add_define(name, Expr::lit(value));
    }

    ExprPtr no_nodes = Expr::ident("NoNodes");
    m.vars.push_back({"ldataArr", no_nodes, nullptr});
    m.vars.push_back({"pdataArr", no_nodes, nullptr});
    m.vars.push_back({"terminated", nullptr, Expr::ident("False")});
    for (const auto& v : vp.mutable_vars) m.vars.push_back({v, no_nodes, nullptr});
    if (uses_rcvmsgs) m.vars.push_back({"bufferSize", no_nodes, nullptr});

    m.channels.push_back(
        {"nodeChannels", no_nodes, csp::parse_expr_text(cfg.node_channel_capacity)});
    for (const auto& list : vp.fifo_lists) {
      std::string cap = cfg.fifo_capacity(list);
      if (cap.empty()) throw MissingCapacity(list);
      m.channels.push_back({list, no_nodes, csp::parse_expr_text(cap)});
    }
    if (uses_rcvmsgs)
      m.channels.push_back({"buffer", no_nodes, csp::parse_expr_text("NoNodes-1")});

    csp::ProcessDef entry;
    entry.name = entry_name;
    entry.params = {"nodeId", "ldata", "pdata"};
    entry.body = std::move(entry_body);
    m.processes.push_back(std::move(entry));
    for (auto& p : loop_procs) m.processes.push_back(std::move(p));
    for (auto& p : helper_procs) m.processes.push_back(std::move(p));

    csp::SystemDef sys;
    sys.name = cfg.system_name;
    sys.binder = "nodeId";
    sys.lo = Expr::lit(0);
    sys.hi = Expr::bin(BinOp::Sub, Expr::ident("NoNodes"), Expr::lit(1));
    sys.callee = entry_name;
    sys.args = {Expr::ident("nodeId"), Expr::index("ldataArr", Expr::ident("nodeId")),
                Expr::index("pdataArr", Expr::ident("nodeId"))};
    m.system = std::move(sys);

    m.predicates.push_back(
        {"Terminated", Expr::bin(BinOp::Eq, Expr::ident("terminated"), Expr::ident("True"))});
    m.assertions.push_back({csp::Assertion::Kind::DeadlockFree, cfg.system_name, ""});
    m.assertions.push_back({csp::Assertion::Kind::Reaches, cfg.system_name, "Terminated"});
    m.assertions.push_back(
        {csp::Assertion::Kind::AlwaysEventually, cfg.system_name, "Terminated"});

    csp::validate_model(m);
    for (const auto& c : m.channels)
      if (csp::eval_const(m, c.capacity) < 1)
        throw ConfigError("channel '" + c.name + "' capacity must be >= 1");
    return m;
  }
};

}  // namespace

std::string TranslationConfig::fifo_capacity(const std::string& list) const {
  for (const auto& [name, cap] : fifo_capacities)
    if (name == list) return cap;
  return "";
}

TranslationConfig TranslationConfig::parse(const std::string& text) {
  TranslationConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool saw_nodes = false, saw_iters = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value", lineno);
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("expected key = value", lineno);
    try {
      if (key == "no_nodes") {
        cfg.no_nodes = std::stoi(value);
        saw_nodes = true;
      } else if (key == "fl_srv_id") {
        cfg.fl_srv_id = std::stoi(value);
      } else if (key == "no_iterations") {
        cfg.no_iterations = std::stoi(value);
        saw_iters = true;
      } else if (key == "node_channel_capacity") {
        cfg.node_channel_capacity = value;
      } else if (key == "system_name") {
        cfg.system_name = value;
      } else if (key.rfind("fifo.", 0) == 0) {
        cfg.fifo_capacities.emplace_back(key.substr(5), value);
      } else if (key.rfind("define.", 0) == 0) {
        cfg.extra_defines.emplace_back(key.substr(7), value);
      } else if (key.rfind("map.", 0) == 0) {
        cfg.name_map[key.substr(4)] = value;
      } else {
        throw ConfigError("unknown key: " + key, lineno);
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("invalid integer for key: " + key, lineno);
    }
  }
  if (!saw_nodes) throw ConfigError("missing key: no_nodes");
  if (!saw_iters) throw ConfigError("missing key: no_iterations");
  if (cfg.no_nodes < 1) throw ConfigError("no_nodes must be >= 1");
  if (cfg.no_iterations < 1) throw ConfigError("no_iterations must be >= 1");
  if (cfg.fl_srv_id && (*cfg.fl_srv_id < 0 || *cfg.fl_srv_id >= cfg.no_nodes))
    throw ConfigError("fl_srv_id out of range");
  return cfg;
}

std::string TranslationConfig::to_text() const {
  std::ostringstream os;
  os << "no_nodes = " << no_nodes << "\n";
  if (fl_srv_id) os << "fl_srv_id = " << *fl_srv_id << "\n";
  os << "no_iterations = " << no_iterations << "\n";
  os << "node_channel_capacity = " << node_channel_capacity << "\n";
  os << "system_name = " << system_name << "\n";
  for (const auto& [name, cap] : fifo_capacities) os << "fifo." << name << " = " << cap << "\n";
  for (const auto& [name, val] : extra_defines) os << "define." << name << " = " << val << "\n";
  return os.str();
}

csp::CspModel translate(const py::ValidatedProgram& program, const TranslationConfig& config,
                        const py::MessageShapeMap& shapes) {
  if (config.no_nodes < 1) throw ConfigError("no_nodes must be >= 1");
  if (config.no_iterations < 1) throw ConfigError("no_iterations must be >= 1");
  if (config.fl_srv_id && (*config.fl_srv_id < 0 || *config.fl_srv_id >= config.no_nodes))
    throw ConfigError("fl_srv_id out of range");
  return Lowerer(program, config, shapes).run();
}

csp::CspModel translate_source(const std::string& python_source,
                               const TranslationConfig& config) {
  py::PyProgram prog = py::parse_program(python_source);
  py::ValidatedProgram vp = py::validate_restrictions(prog, config.name_map);
  py::MessageShapeMap shapes = py::infer_message_shapes(vp);
  return translate(vp, config, shapes);
}

}  // namespace fla2csp::xlate
