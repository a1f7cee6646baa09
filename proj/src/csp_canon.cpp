#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "fla2csp/cspast.hpp"
#include "fla2csp/diag.hpp"

namespace fla2csp::csp {

namespace {

// --- term normalization ---------------------------------------------------

TermPtr norm_term(const TermPtr& t);

// Sequential append with absorption into prefix continuations, producing a
// right-nested Seq spine with Skip units dropped.
TermPtr seq_append(const TermPtr& a, const TermPtr& b) {
  if (!b || b->kind == Term::Kind::Skip) {
    if (a->kind != Term::Kind::Skip) return a;
    return a;  // Skip; Skip
  }
  switch (a->kind) {
    case Term::Kind::Skip:
      return b;
    case Term::Kind::DataOp:
      return Term::data(a->stmts, seq_append(a->cont, b));
    case Term::Kind::ChanOut:
      return Term::out(a->chan, a->chan_index, a->fields, seq_append(a->cont, b));
    case Term::Kind::ChanIn:
      return Term::in(a->chan, a->chan_index, a->binds, seq_append(a->cont, b));
    case Term::Kind::Seq:
      return Term::seq(a->first, seq_append(a->second, b));
    default:
      return Term::seq(a, b);
  }
}

DataStmt norm_stmt(const DataStmt& s) {
  if (s.kind == DataStmt::Kind::Assign) return s;
  ExprPtr target = s.index ? Expr::index(s.target, s.index) : Expr::ident(s.target);
  DataStmt out;
  out.kind = DataStmt::Kind::Assign;
  out.target = s.target;
  out.index = s.index;
  out.value = Expr::bin(s.kind == DataStmt::Kind::Incr ? BinOp::Add : BinOp::Sub,
                        std::move(target), Expr::lit(1));
  return out;
}

TermPtr norm_term(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Skip:
    case Term::Kind::Call:
      return t;
    case Term::Kind::DataOp: {
      std::vector<DataStmt> stmts;
      for (const auto& s : t->stmts) stmts.push_back(norm_stmt(s));
      return Term::data(std::move(stmts), norm_term(t->cont));
    }
    case Term::Kind::ChanOut:
      return Term::out(t->chan, t->chan_index, t->fields, norm_term(t->cont));
    case Term::Kind::ChanIn:
      return Term::in(t->chan, t->chan_index, t->binds, norm_term(t->cont));
    case Term::Kind::Cond:
      return Term::cond(t->guard, norm_term(t->then_t),
                        t->else_t ? norm_term(t->else_t) : nullptr);
    case Term::Kind::Seq:
      return seq_append(norm_term(t->first), norm_term(t->second));
  }
  return t;
}

// --- traversal helpers ----------------------------------------------------

void scan_expr_names(const ExprPtr& e, const std::function<void(const std::string&)>& f) {
  if (!e) return;
  switch (e->kind) {
    case Expr::Kind::Int:
      return;
    case Expr::Kind::Ident:
      f(e->name);
      return;
    case Expr::Kind::Index:
    case Expr::Kind::CCount:
      f(e->name);
      scan_expr_names(e->lhs, f);
      return;
    case Expr::Kind::Neg:
      scan_expr_names(e->lhs, f);
      return;
    case Expr::Kind::Binary:
      scan_expr_names(e->lhs, f);
      scan_expr_names(e->rhs, f);
      return;
  }
}

void scan_term(const TermPtr& t, const std::function<void(const std::string&)>& name_f,
               const std::function<void(const std::string&)>& call_f) {
  if (!t) return;
  switch (t->kind) {
    case Term::Kind::Skip:
      return;
    case Term::Kind::DataOp:
      for (const auto& s : t->stmts) {
        name_f(s.target);
        scan_expr_names(s.index, name_f);
        scan_expr_names(s.value, name_f);
      }
      scan_term(t->cont, name_f, call_f);
      return;
    case Term::Kind::ChanOut:
      name_f(t->chan);
      scan_expr_names(t->chan_index, name_f);
      for (const auto& f : t->fields) scan_expr_names(f, name_f);
      scan_term(t->cont, name_f, call_f);
      return;
    case Term::Kind::ChanIn:
      name_f(t->chan);
      scan_expr_names(t->chan_index, name_f);
      scan_term(t->cont, name_f, call_f);
      return;
    case Term::Kind::Cond:
      scan_expr_names(t->guard, name_f);
      scan_term(t->then_t, name_f, call_f);
      scan_term(t->else_t, name_f, call_f);
      return;
    case Term::Kind::Call:
      call_f(t->callee);
      for (const auto& a : t->args) scan_expr_names(a, name_f);
      return;
    case Term::Kind::Seq:
      scan_term(t->first, name_f, call_f);
      scan_term(t->second, name_f, call_f);
      return;
  }
}

// --- renaming -------------------------------------------------------------

struct Renamer {
  const std::map<std::string, std::string>& proc_names;
  int next_binder = 0;

  ExprPtr rename_expr(const ExprPtr& e, const std::map<std::string, std::string>& env) {
    if (!e) return e;
    switch (e->kind) {
      case Expr::Kind::Int:
        return e;
      case Expr::Kind::Ident: {
        auto it = env.find(e->name);
        return it == env.end() ? e : Expr::ident(it->second);
      }
      case Expr::Kind::Index:
        return Expr::index(e->name, rename_expr(e->lhs, env));
      case Expr::Kind::CCount:
        return Expr::ccount(e->name, rename_expr(e->lhs, env));
      case Expr::Kind::Neg:
        return Expr::neg(rename_expr(e->lhs, env));
      case Expr::Kind::Binary:
        return Expr::bin(e->op, rename_expr(e->lhs, env), rename_expr(e->rhs, env));
    }
    return e;
  }

  TermPtr rename(const TermPtr& t, std::map<std::string, std::string> env) {
    switch (t->kind) {
      case Term::Kind::Skip:
        return t;
      case Term::Kind::DataOp: {
        std::vector<DataStmt> stmts;
        for (const auto& s : t->stmts) {
          DataStmt ns = s;  // targets are globals, never bound names
          ns.index = rename_expr(s.index, env);
          ns.value = rename_expr(s.value, env);
          stmts.push_back(std::move(ns));
        }
        TermPtr cont = rename(t->cont, std::move(env));
        return Term::data(std::move(stmts), std::move(cont));
      }
      case Term::Kind::ChanOut: {
        std::vector<ExprPtr> fields;
        for (const auto& f : t->fields) fields.push_back(rename_expr(f, env));
        ExprPtr idx = rename_expr(t->chan_index, env);
        TermPtr cont = rename(t->cont, std::move(env));
        return Term::out(t->chan, std::move(idx), std::move(fields), std::move(cont));
      }
      case Term::Kind::ChanIn: {
        ExprPtr idx = rename_expr(t->chan_index, env);
        std::vector<std::string> binds;
        for (const auto& b : t->binds) {
          std::string nb = "b" + std::to_string(next_binder++);
          env[b] = nb;
          binds.push_back(std::move(nb));
        }
        TermPtr cont = rename(t->cont, std::move(env));
        return Term::in(t->chan, std::move(idx), std::move(binds), std::move(cont));
      }
      case Term::Kind::Cond: {
        ExprPtr guard = rename_expr(t->guard, env);
        TermPtr then_t = rename(t->then_t, env);
        TermPtr else_t = t->else_t ? rename(t->else_t, env) : nullptr;
        return Term::cond(std::move(guard), std::move(then_t), std::move(else_t));
      }
      case Term::Kind::Call: {
        auto it = proc_names.find(t->callee);
        std::vector<ExprPtr> args;
        for (const auto& a : t->args) args.push_back(rename_expr(a, env));
        return Term::call(it == proc_names.end() ? t->callee : it->second, std::move(args));
      }
      case Term::Kind::Seq: {
        TermPtr first = rename(t->first, env);
        TermPtr second = rename(t->second, std::move(env));
        return Term::seq(std::move(first), std::move(second));
      }
    }
    return t;
  }
};

// Permute call-site arguments according to each callee's parameter permutation.
TermPtr permute_calls(const TermPtr& t,
                      const std::map<std::string, std::vector<std::size_t>>& perms) {
  switch (t->kind) {
    case Term::Kind::Skip:
      return t;
    case Term::Kind::DataOp:
      return Term::data(t->stmts, permute_calls(t->cont, perms));
    case Term::Kind::ChanOut:
      return Term::out(t->chan, t->chan_index, t->fields, permute_calls(t->cont, perms));
    case Term::Kind::ChanIn:
      return Term::in(t->chan, t->chan_index, t->binds, permute_calls(t->cont, perms));
    case Term::Kind::Cond:
      return Term::cond(t->guard, permute_calls(t->then_t, perms),
                        t->else_t ? permute_calls(t->else_t, perms) : nullptr);
    case Term::Kind::Call: {
      auto it = perms.find(t->callee);
      if (it == perms.end() || it->second.size() != t->args.size()) return t;
      std::vector<ExprPtr> args(t->args.size());
      for (std::size_t i = 0; i < t->args.size(); ++i) args[i] = t->args[it->second[i]];
      return Term::call(t->callee, std::move(args));
    }
    case Term::Kind::Seq:
      return Term::seq(permute_calls(t->first, perms), permute_calls(t->second, perms));
  }
  return t;
}

CspModel canonicalize_impl(const CspModel& model, std::vector<std::string>* orig_names) {
  CspModel m = model;

  // 1. normalize every body
  for (auto& p : m.processes) p.body = norm_term(p.body);

  // 2. parameter permutation by first use in the body; unused keep position.
  // Reordering a callee's parameters permutes its call sites, which can
  // change the caller's own first-use order, so iterate to a fixpoint.
  for (int round = 0; round < 100; ++round) {
    std::map<std::string, std::vector<std::size_t>> perms;
    bool all_identity = true;
    for (const auto& p : m.processes) {
      std::vector<std::string> order;
      std::set<std::string> seen;
      std::set<std::string> params(p.params.begin(), p.params.end());
      scan_term(
          p.body,
          [&](const std::string& n) {
            if (params.count(n) && seen.insert(n).second) order.push_back(n);
          },
          [](const std::string&) {});
      std::vector<std::size_t> perm;
      for (const auto& n : order) {
        auto it = std::find(p.params.begin(), p.params.end(), n);
        perm.push_back(static_cast<std::size_t>(it - p.params.begin()));
      }
      for (std::size_t i = 0; i < p.params.size(); ++i)
        if (!seen.count(p.params[i])) perm.push_back(i);
      for (std::size_t i = 0; i < perm.size(); ++i)
        if (perm[i] != i) all_identity = false;
      perms[p.name] = std::move(perm);
    }
    if (all_identity) break;
    for (auto& p : m.processes) {
      const auto& perm = perms[p.name];
      std::vector<std::string> np(p.params.size());
      for (std::size_t i = 0; i < perm.size(); ++i) np[i] = p.params[perm[i]];
      p.params = std::move(np);
      p.body = permute_calls(p.body, perms);
    }
  }

  // 3. process order: first use from the system definition
  std::vector<std::size_t> order;
  std::set<std::string> visited;
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < m.processes.size(); ++i) index_of[m.processes[i].name] = i;
  std::vector<std::string> work;
  if (m.system && index_of.count(m.system->callee)) work.push_back(m.system->callee);
  while (!work.empty()) {
    std::string cur = work.front();
    work.erase(work.begin());
    if (!visited.insert(cur).second) continue;
    std::size_t idx = index_of[cur];
    order.push_back(idx);
    scan_term(
        m.processes[idx].body, [](const std::string&) {},
        [&](const std::string& callee) {
          if (index_of.count(callee) && !visited.count(callee) &&
              std::find(work.begin(), work.end(), callee) == work.end())
            work.push_back(callee);
        });
  }
  for (std::size_t i = 0; i < m.processes.size(); ++i)
    if (!visited.count(m.processes[i].name)) order.push_back(i);

  std::vector<ProcessDef> procs;
  std::map<std::string, std::string> proc_rename;
  if (orig_names) orig_names->clear();
  for (std::size_t i = 0; i < order.size(); ++i) {
    procs.push_back(m.processes[order[i]]);
    proc_rename[procs.back().name] = "P" + std::to_string(i);
    if (orig_names) orig_names->push_back(procs.back().name);
  }

  // 4. alpha-rename processes, params, binders
  for (std::size_t i = 0; i < procs.size(); ++i) {
    Renamer rn{proc_rename};
    std::map<std::string, std::string> env;
    std::vector<std::string> np;
    for (std::size_t k = 0; k < procs[i].params.size(); ++k) {
      std::string nn = "p" + std::to_string(k);
      env[procs[i].params[k]] = nn;
      np.push_back(std::move(nn));
    }
    procs[i].params = std::move(np);
    procs[i].body = rn.rename(procs[i].body, std::move(env));
    procs[i].name = "P" + std::to_string(i);
    procs[i].line = 0;
  }
  m.processes = std::move(procs);

  if (m.system) {
    Renamer rn{proc_rename};
    std::map<std::string, std::string> env{{m.system->binder, "n0"}};
    std::vector<ExprPtr> args;
    for (const auto& a : m.system->args) args.push_back(rn.rename_expr(a, env));
    m.system->args = std::move(args);
    m.system->binder = "n0";
    auto it = proc_rename.find(m.system->callee);
    if (it != proc_rename.end()) m.system->callee = it->second;
  }

  // 5. sort declarations
  std::sort(m.defines.begin(), m.defines.end(),
            [](const Define& a, const Define& b) { return a.name < b.name; });
  std::sort(m.predicates.begin(), m.predicates.end(),
            [](const PredDef& a, const PredDef& b) { return a.name < b.name; });
  std::sort(m.vars.begin(), m.vars.end(),
            [](const VarDecl& a, const VarDecl& b) { return a.name < b.name; });
  std::sort(m.channels.begin(), m.channels.end(),
            [](const ChanDecl& a, const ChanDecl& b) { return a.name < b.name; });
  std::sort(m.assertions.begin(), m.assertions.end(), [](const Assertion& a, const Assertion& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    if (a.system != b.system) return a.system < b.system;
    return a.predicate < b.predicate;
  });

  // default var initializer is 0
  for (auto& v : m.vars) {
    if (v.init && v.init->kind == Expr::Kind::Int && v.init->value == 0) v.init = nullptr;
  }
  return m;
}

// --- structural comparison ------------------------------------------------

std::string expr_sig(const ExprPtr& e);

std::string expr_sig(const ExprPtr& e) {
  if (!e) return "_";
  std::ostringstream os;
  switch (e->kind) {
    case Expr::Kind::Int: os << e->value; break;
    case Expr::Kind::Ident: os << e->name; break;
    case Expr::Kind::Index: os << e->name << '[' << expr_sig(e->lhs) << ']'; break;
    case Expr::Kind::Neg: os << "-(" << expr_sig(e->lhs) << ')'; break;
    case Expr::Kind::CCount: os << "ccount(" << e->name << ',' << expr_sig(e->lhs) << ')'; break;
    case Expr::Kind::Binary:
      os << '(' << expr_sig(e->lhs) << ')' << static_cast<int>(e->op) << '('
         << expr_sig(e->rhs) << ')';
      break;
  }
  return os.str();
}

bool expr_eq(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return expr_sig(a) == expr_sig(b);
}

// Returns empty string on equality; else a path to the first difference.
std::string term_diff(const TermPtr& a, const TermPtr& b, const std::string& path) {
  if (!a || !b) return (!a && !b) ? "" : path + ": term missing on one side";
  if (a->kind != b->kind) return path + ": different term kinds";
  switch (a->kind) {
    case Term::Kind::Skip:
      return "";
    case Term::Kind::DataOp: {
      if (a->stmts.size() != b->stmts.size()) return path + ": data-op statement count";
      for (std::size_t i = 0; i < a->stmts.size(); ++i) {
        const auto &x = a->stmts[i], &y = b->stmts[i];
        if (x.target != y.target || !expr_eq(x.index, y.index) || !expr_eq(x.value, y.value))
          return path + ": data-op statement " + std::to_string(i);
      }
      return term_diff(a->cont, b->cont, path + "/cont");
    }
    case Term::Kind::ChanOut: {
      if (a->chan != b->chan) return path + ": channel name (" + a->chan + " vs " + b->chan + ")";
      if (!expr_eq(a->chan_index, b->chan_index)) return path + ": channel index";
      if (a->fields.size() != b->fields.size()) return path + ": message width";
      for (std::size_t i = 0; i < a->fields.size(); ++i)
        if (!expr_eq(a->fields[i], b->fields[i]))
          return path + ": message field " + std::to_string(i);
      return term_diff(a->cont, b->cont, path + "/cont");
    }
    case Term::Kind::ChanIn: {
      if (a->chan != b->chan) return path + ": channel name (" + a->chan + " vs " + b->chan + ")";
      if (!expr_eq(a->chan_index, b->chan_index)) return path + ": channel index";
      if (a->binds != b->binds) return path + ": input bindings";
      return term_diff(a->cont, b->cont, path + "/cont");
    }
    case Term::Kind::Cond: {
      if (!expr_eq(a->guard, b->guard))
        return path + ": condition (" + expr_sig(a->guard) + " vs " + expr_sig(b->guard) + ")";
      std::string d = term_diff(a->then_t, b->then_t, path + "/then");
      if (!d.empty()) return d;
      if (!a->else_t != !b->else_t) return path + ": else branch present on one side only";
      if (a->else_t) return term_diff(a->else_t, b->else_t, path + "/else");
      return "";
    }
    case Term::Kind::Call: {
      if (a->callee != b->callee)
        return path + ": callee (" + a->callee + " vs " + b->callee + ")";
      if (a->args.size() != b->args.size()) return path + ": call arity";
      for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!expr_eq(a->args[i], b->args[i]))
          return path + ": call argument " + std::to_string(i) + " (" +
                 expr_sig(a->args[i]) + " vs " + expr_sig(b->args[i]) + ")";
      return "";
    }
    case Term::Kind::Seq: {
      std::string d = term_diff(a->first, b->first, path + "/seq[0]");
      if (!d.empty()) return d;
      return term_diff(a->second, b->second, path + "/seq[1]");
    }
  }
  return "";
}

}  // namespace

CspModel canonicalize(const CspModel& model) { return canonicalize_impl(model, nullptr); }

EquivalenceReport compare_structural(const CspModel& a, const CspModel& b) {
  std::vector<std::string> names_a, names_b;
  CspModel ca = canonicalize_impl(a, &names_a);
  CspModel cb = canonicalize_impl(b, &names_b);

  auto fail = [](std::string path) { return EquivalenceReport{false, std::move(path)}; };

  if (ca.enums.size() != cb.enums.size()) return fail("enum declaration count");
  for (std::size_t i = 0; i < ca.enums.size(); ++i)
    if (ca.enums[i].names != cb.enums[i].names)
      return fail("enum declaration " + std::to_string(i));
  if (ca.defines.size() != cb.defines.size()) return fail("define count");
  for (std::size_t i = 0; i < ca.defines.size(); ++i) {
    if (ca.defines[i].name != cb.defines[i].name)
      return fail("define " + ca.defines[i].name + " vs " + cb.defines[i].name);
    if (!expr_eq(ca.defines[i].value, cb.defines[i].value))
      return fail("define " + ca.defines[i].name + " value");
  }
  if (ca.vars.size() != cb.vars.size()) return fail("var count");
  for (std::size_t i = 0; i < ca.vars.size(); ++i) {
    const auto &x = ca.vars[i], &y = cb.vars[i];
    if (x.name != y.name) return fail("var " + x.name + " vs " + y.name);
    if (!expr_eq(x.size, y.size) || !expr_eq(x.init, y.init)) return fail("var " + x.name);
  }
  if (ca.channels.size() != cb.channels.size()) return fail("channel count");
  for (std::size_t i = 0; i < ca.channels.size(); ++i) {
    const auto &x = ca.channels[i], &y = cb.channels[i];
    if (x.name != y.name) return fail("channel " + x.name + " vs " + y.name);
    if (!expr_eq(x.size, y.size)) return fail("channel " + x.name + " size");
    if (!expr_eq(x.capacity, y.capacity)) return fail("channel " + x.name + " capacity");
  }
  if (ca.processes.size() != cb.processes.size()) return fail("process count");
  for (std::size_t i = 0; i < ca.processes.size(); ++i) {
    const auto &x = ca.processes[i], &y = cb.processes[i];
    std::string label = "process " + x.name + " (" + names_a[i] + " vs " + names_b[i] + ")";
    if (x.params.size() != y.params.size()) return fail(label + ": parameter count");
    std::string d = term_diff(x.body, y.body, label);
    if (!d.empty()) return fail(d);
  }
  if (!ca.system != !cb.system) return fail("system definition present on one side only");
  if (ca.system) {
    const auto &x = *ca.system, &y = *cb.system;
    if (!expr_eq(x.lo, y.lo) || !expr_eq(x.hi, y.hi)) return fail("system range");
    if (x.callee != y.callee) return fail("system callee");
    if (x.args.size() != y.args.size()) return fail("system call arity");
    for (std::size_t i = 0; i < x.args.size(); ++i)
      if (!expr_eq(x.args[i], y.args[i]))
        return fail("system call argument " + std::to_string(i));
  }
  if (ca.predicates.size() != cb.predicates.size()) return fail("predicate count");
  for (std::size_t i = 0; i < ca.predicates.size(); ++i) {
    if (ca.predicates[i].name != cb.predicates[i].name ||
        !expr_eq(ca.predicates[i].expr, cb.predicates[i].expr))
      return fail("predicate " + ca.predicates[i].name);
  }
  if (ca.assertions.size() != cb.assertions.size()) return fail("assertion count");
  for (std::size_t i = 0; i < ca.assertions.size(); ++i) {
    const auto &x = ca.assertions[i], &y = cb.assertions[i];
    if (x.kind != y.kind || x.predicate != y.predicate)
      return fail("assertion " + std::to_string(i));
  }
  return {true, ""};
}

}  // namespace fla2csp::csp
