#include "fla2csp/checker.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "fla2csp/diag.hpp"

namespace fla2csp::mc {

using csp::BinOp;
using csp::Term;

namespace {

// Per-node control state is a stack of (term, environment) frames. Stacks
// repeat massively across the state space, so they are interned and a state
// holds one stack id per node plus channel buffers and globals. All runtime
// values are kept in 16 bits; anything larger is outside the models this
// tool targets and raises an error rather than wrapping.

int16_t narrow(long v) {
  if (v < INT16_MIN || v > INT16_MAX) throw EvalError("state value overflow");
  return static_cast<int16_t>(v);
}

void put_u8(std::string& s, std::size_t v) {
  if (v > 0xff) throw EvalError("state encoding overflow");
  s.push_back(static_cast<char>(v));
}
void put_u16(std::string& s, std::size_t v) {
  if (v > 0xffff) throw EvalError("state encoding overflow");
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}
void put_i16(std::string& s, int16_t v) {
  auto u = static_cast<uint16_t>(v);
  s.push_back(static_cast<char>(u & 0xff));
  s.push_back(static_cast<char>(u >> 8));
}
void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
unsigned get_u8(std::string_view s, std::size_t& p) {
  return static_cast<unsigned char>(s[p++]);
}
unsigned get_u16(std::string_view s, std::size_t& p) {
  unsigned lo = static_cast<unsigned char>(s[p++]);
  unsigned hi = static_cast<unsigned char>(s[p++]);
  return lo | (hi << 8);
}
int16_t get_i16(std::string_view s, std::size_t& p) {
  return static_cast<int16_t>(get_u16(s, p));
}
uint32_t get_u32(std::string_view s, std::size_t& p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(s[p++])) << (8 * i);
  return v;
}

}  // namespace

struct Explorer::Impl {
  csp::CspModel model;
  Options opt;

  // name and term interning
  std::unordered_map<std::string, uint32_t> name_ids;
  std::vector<std::string> names;
  std::unordered_map<const Term*, uint32_t> term_ids;
  std::vector<const Term*> terms;

  std::unordered_map<std::string, long> consts;  // defines and enum members

  struct GVar {
    std::string name;
    long size;    // 0 for scalar
    long offset;
  };
  std::vector<GVar> gvars;
  std::unordered_map<std::string, int> gvar_by_name;
  std::vector<int16_t> init_globals;

  struct Chan {
    std::string name;
    long size = 0;
    long cap = 0;
    int width = 1;
    long slot0 = 0;
  };
  std::vector<Chan> chans;
  std::unordered_map<std::string, int> chan_by_name;
  long total_slots = 0;

  int ncomp = 0;

  using Env = std::vector<std::pair<uint32_t, int16_t>>;  // sorted by name id
  struct Frame {
    uint32_t term;
    Env env;
  };
  using Stack = std::vector<Frame>;

  // stack interning
  std::deque<Stack> stack_table;
  std::unordered_map<std::string, uint32_t> stack_index;

  struct State {
    std::vector<uint32_t> stacks;          // per node
    std::vector<std::vector<int16_t>> bufs;  // flattened fields per slot
    std::vector<int16_t> globals;
  };
  State init_state;

  // cached per-expression name resolution, avoids string hashing while running
  struct ExprInfo {
    uint32_t name_id = UINT32_MAX;  // for env lookups
    int cls = 0;                    // 1 const, 2 scalar global, 0 neither
    long constv = 0;
    long goffset = 0;
  };
  std::unordered_map<const csp::Expr*, ExprInfo> expr_info;

  // exploration results
  bool explored = false;
  std::deque<std::string> key_blocks;        // arena; views below point here
  std::vector<std::string_view> key_of;      // state id -> encoded bytes
  std::unordered_map<std::string_view, uint32_t> index;
  std::vector<uint32_t> parent;
  std::vector<int16_t> via_comp;
  std::size_t edges = 0;
  std::vector<uint32_t> succ_flat;           // CSR adjacency, built in id order
  std::vector<uint32_t> succ_off;
  std::vector<std::vector<uint8_t>> pred_sat;  // per model predicate, per state
  long first_deadlock = -1;
  bool partial = false;
  std::vector<uint32_t> terminals;
  std::vector<uint32_t> proper_ends;
  std::map<std::string, std::size_t> max_occ;
  std::set<std::string> non_monotone;

  Impl(csp::CspModel m, Options o) : model(std::move(m)), opt(o) { build(); }

  uint32_t nid(const std::string& n) {
    auto [it, fresh] = name_ids.try_emplace(n, static_cast<uint32_t>(names.size()));
    if (fresh) names.push_back(n);
    return it->second;
  }
  uint32_t tid(const Term* t) {
    auto [it, fresh] = term_ids.try_emplace(t, static_cast<uint32_t>(terms.size()));
    if (fresh) terms.push_back(t);
    return it->second;
  }

  std::string encode_stack(const Stack& st) {
    std::string out;
    put_u8(out, st.size());
    for (const auto& f : st) {
      put_u16(out, f.term);
      put_u8(out, f.env.size());
      for (const auto& [k, v] : f.env) {
        put_u16(out, k);
        put_i16(out, v);
      }
    }
    return out;
  }

  uint32_t sid(const Stack& st) {
    std::string key = encode_stack(st);
    auto it = stack_index.find(key);
    if (it != stack_index.end()) return it->second;
    auto id = static_cast<uint32_t>(stack_table.size());
    stack_table.push_back(st);
    stack_index.emplace(std::move(key), id);
    return id;
  }

  void scan_widths(const csp::TermPtr& t) {
    if (!t) return;
    if (t->kind == Term::Kind::ChanOut || t->kind == Term::Kind::ChanIn) {
      auto it = chan_by_name.find(t->chan);
      if (it != chan_by_name.end()) {
        int w = t->kind == Term::Kind::ChanOut ? static_cast<int>(t->fields.size())
                                               : static_cast<int>(t->binds.size());
        chans[static_cast<std::size_t>(it->second)].width = w;
      }
    }
    scan_widths(t->cont);
    scan_widths(t->then_t);
    scan_widths(t->else_t);
    scan_widths(t->first);
    scan_widths(t->second);
  }

  void build() {
    for (const auto& e : model.enums)
      for (std::size_t i = 0; i < e.names.size(); ++i) consts[e.names[i]] = static_cast<long>(i);
    for (const auto& d : model.defines) consts[d.name] = csp::eval_const(model, d.value);

    long off = 0;
    for (const auto& v : model.vars) {
      GVar g{v.name, v.size ? csp::eval_const(model, v.size) : 0, off};
      off += g.size == 0 ? 1 : g.size;
      gvar_by_name[v.name] = static_cast<int>(gvars.size());
      int16_t init = narrow(v.init ? csp::eval_const(model, v.init) : 0);
      for (long i = 0; i < (g.size == 0 ? 1 : g.size); ++i) init_globals.push_back(init);
      gvars.push_back(std::move(g));
    }

    for (const auto& c : model.channels) {
      Chan ch;
      ch.name = c.name;
      ch.size = csp::eval_const(model, c.size);
      ch.cap = csp::eval_const(model, c.capacity);
      ch.slot0 = total_slots;
      total_slots += ch.size;
      chan_by_name[c.name] = static_cast<int>(chans.size());
      chans.push_back(std::move(ch));
    }
    for (const auto& p : model.processes) scan_widths(p.body);

    if (!model.system) throw EvalError("model has no system definition");
    const auto& sys = *model.system;
    long lo = csp::eval_const(model, sys.lo);
    long hi = csp::eval_const(model, sys.hi);
    if (hi < lo) throw EvalError("empty system range");
    ncomp = static_cast<int>(hi - lo + 1);

    init_state.globals = init_globals;
    init_state.bufs.assign(static_cast<std::size_t>(total_slots), {});
    const csp::ProcessDef* entry = model.find_process(sys.callee);
    if (!entry) throw EvalError("unknown system callee: " + sys.callee);
    if (entry->params.size() != sys.args.size())
      throw EvalError("system call arity mismatch");
    for (long n = lo; n <= hi; ++n) {
      Env binder_env{{nid(sys.binder), narrow(n)}};
      Env env;
      for (std::size_t i = 0; i < sys.args.size(); ++i)
        env.emplace_back(nid(entry->params[i]), narrow(eval(sys.args[i], init_state, binder_env)));
      std::sort(env.begin(), env.end());
      Stack stack;
      push_term(stack, entry->body.get(), env);
      init_state.stacks.push_back(sid(stack));
    }
  }

  // stack top is the back; Seq splits into frames, a trailing Skip frame is
  // kept only when nothing else remains to run
  void push_term(Stack& stack, const Term* t, const Env& env) {
    if (t->kind == Term::Kind::Seq) {
      push_term(stack, t->second.get(), env);
      push_term(stack, t->first.get(), env);
      return;
    }
    if (t->kind == Term::Kind::Skip && !stack.empty()) return;
    stack.push_back(Frame{tid(t), env});
  }

  const ExprInfo& info_of(const csp::Expr* e) {
    auto it = expr_info.find(e);
    if (it != expr_info.end()) return it->second;
    ExprInfo inf;
    inf.name_id = nid(e->name);
    auto c = consts.find(e->name);
    if (c != consts.end()) {
      inf.cls = 1;
      inf.constv = c->second;
    } else {
      auto g = gvar_by_name.find(e->name);
      if (g != gvar_by_name.end() && gvars[static_cast<std::size_t>(g->second)].size == 0) {
        inf.cls = 2;
        inf.goffset = gvars[static_cast<std::size_t>(g->second)].offset;
      }
    }
    return expr_info.emplace(e, inf).first->second;
  }

  long eval(const csp::ExprPtr& e, const State& s, const Env& env) {
    switch (e->kind) {
      case csp::Expr::Kind::Int:
        return e->value;
      case csp::Expr::Kind::Ident: {
        const ExprInfo& inf = info_of(e.get());
        for (const auto& [k, v] : env)
          if (k == inf.name_id) return v;
        if (inf.cls == 1) return inf.constv;
        if (inf.cls == 2) return s.globals[static_cast<std::size_t>(inf.goffset)];
        throw EvalError("unbound name in evaluation: " + e->name);
      }
      case csp::Expr::Kind::Index: {
        auto g = gvar_by_name.find(e->name);
        if (g == gvar_by_name.end()) throw EvalError("unknown array: " + e->name);
        const GVar& gv = gvars[static_cast<std::size_t>(g->second)];
        long idx = eval(e->lhs, s, env);
        if (gv.size == 0 || idx < 0 || idx >= gv.size)
          throw EvalError("array index out of range: " + e->name);
        return s.globals[static_cast<std::size_t>(gv.offset + idx)];
      }
      case csp::Expr::Kind::Neg:
        return -eval(e->lhs, s, env);
      case csp::Expr::Kind::Binary: {
        long a = eval(e->lhs, s, env), b = eval(e->rhs, s, env);
        switch (e->op) {
          case BinOp::Add: return a + b;
          case BinOp::Sub: return a - b;
          case BinOp::Mul: return a * b;
          case BinOp::Eq: return a == b;
          case BinOp::Ne: return a != b;
          case BinOp::Lt: return a < b;
          case BinOp::Le: return a <= b;
          case BinOp::Gt: return a > b;
          case BinOp::Ge: return a >= b;
        }
        throw EvalError("bad operator");
      }
      case csp::Expr::Kind::CCount: {
        const Chan& ch = chans[static_cast<std::size_t>(chan_of(e->name))];
        long slot = slot_of(ch, eval(e->lhs, s, env));
        return static_cast<long>(s.bufs[static_cast<std::size_t>(slot)].size()) / ch.width;
      }
    }
    throw EvalError("bad expression");
  }

  int chan_of(const std::string& name) const {
    auto it = chan_by_name.find(name);
    if (it == chan_by_name.end()) throw EvalError("unknown channel: " + name);
    return it->second;
  }
  static long slot_of(const Chan& ch, long idx) {
    if (idx < 0 || idx >= ch.size) throw EvalError("channel index out of range: " + ch.name);
    return ch.slot0 + idx;
  }

  // enabled components in execution order; each has at most one action
  std::vector<int> enabled(const State& s) {
    std::vector<int> out;
    for (int k = 0; k < ncomp; ++k) {
      int c = opt.reverse_components ? ncomp - 1 - k : k;
      const Stack& stack = stack_table[s.stacks[static_cast<std::size_t>(c)]];
      if (stack.empty()) continue;
      const Frame& f = stack.back();
      const Term* t = terms[f.term];
      bool ok = true;
      if (t->kind == Term::Kind::ChanOut) {
        const Chan& ch = chans[static_cast<std::size_t>(chan_of(t->chan))];
        long slot = slot_of(ch, eval(t->chan_index, s, f.env));
        ok = static_cast<long>(s.bufs[static_cast<std::size_t>(slot)].size()) / ch.width < ch.cap;
      } else if (t->kind == Term::Kind::ChanIn) {
        const Chan& ch = chans[static_cast<std::size_t>(chan_of(t->chan))];
        long slot = slot_of(ch, eval(t->chan_index, s, f.env));
        ok = !s.bufs[static_cast<std::size_t>(slot)].empty();
      }
      if (ok) out.push_back(c);
    }
    return out;
  }

  static void env_set(Env& env, uint32_t id, int16_t v) {
    for (auto& [k, val] : env)
      if (k == id) {
        val = v;
        return;
      }
    env.emplace_back(id, v);
    std::sort(env.begin(), env.end());
  }

  // executes the (unique) action of component c; returns the step label
  std::string apply(State& s, int c, bool want_label = true) {
    Stack stack = stack_table[s.stacks[static_cast<std::size_t>(c)]];
    Frame f = std::move(stack.back());
    stack.pop_back();
    const Term* t = terms[f.term];
    std::ostringstream lbl;
    switch (t->kind) {
      case Term::Kind::Skip:
        if (want_label) lbl << "end";
        break;
      case Term::Kind::DataOp: {
        if (want_label) lbl << "{";
        bool first = true;
        for (const auto& st : t->stmts) {
          const GVar& gv = gvars[static_cast<std::size_t>(gvar_by_name.at(st.target))];
          long idx = 0;
          if (st.index) {
            idx = eval(st.index, s, f.env);
            if (idx < 0 || idx >= std::max<long>(gv.size, 1))
              throw EvalError("array index out of range: " + st.target);
          }
          int16_t& cell = s.globals[static_cast<std::size_t>(gv.offset + idx)];
          long v;
          switch (st.kind) {
            case csp::DataStmt::Kind::Assign: v = eval(st.value, s, f.env); break;
            case csp::DataStmt::Kind::Incr: v = cell + 1; break;
            case csp::DataStmt::Kind::Decr: v = cell - 1; break;
            default: throw EvalError("bad data statement");
          }
          cell = narrow(v);
          if (want_label) {
            if (!first) lbl << "; ";
            first = false;
            lbl << st.target;
            if (st.index) lbl << "[" << idx << "]";
            lbl << "=" << v;
          }
        }
        if (want_label) lbl << "}";
        push_term(stack, t->cont.get(), f.env);
        break;
      }
      case Term::Kind::ChanOut: {
        long idx = eval(t->chan_index, s, f.env);
        const Chan& ch = chans[static_cast<std::size_t>(chan_of(t->chan))];
        long slot = slot_of(ch, idx);
        if (want_label) lbl << t->chan << "[" << idx << "]!";
        auto& buf = s.bufs[static_cast<std::size_t>(slot)];
        for (std::size_t i = 0; i < t->fields.size(); ++i) {
          long v = eval(t->fields[i], s, f.env);
          buf.push_back(narrow(v));
          if (want_label) {
            if (i) lbl << ".";
            lbl << v;
          }
        }
        push_term(stack, t->cont.get(), f.env);
        break;
      }
      case Term::Kind::ChanIn: {
        long idx = eval(t->chan_index, s, f.env);
        const Chan& ch = chans[static_cast<std::size_t>(chan_of(t->chan))];
        long slot = slot_of(ch, idx);
        auto& buf = s.bufs[static_cast<std::size_t>(slot)];
        if (want_label) lbl << t->chan << "[" << idx << "]?";
        Env env = f.env;
        for (std::size_t i = 0; i < t->binds.size(); ++i) {
          int16_t v = buf.front();
          buf.erase(buf.begin());
          env_set(env, nid(t->binds[i]), v);
          if (want_label) {
            if (i) lbl << ".";
            lbl << v;
          }
        }
        push_term(stack, t->cont.get(), env);
        break;
      }
      case Term::Kind::Cond: {
        long g = eval(t->guard, s, f.env);
        if (g) {
          if (want_label) lbl << "if:then";
          push_term(stack, t->then_t.get(), f.env);
        } else if (t->else_t) {
          if (want_label) lbl << "if:else";
          push_term(stack, t->else_t.get(), f.env);
        } else {
          if (want_label) lbl << "if:fall";
        }
        break;
      }
      case Term::Kind::Call: {
        const csp::ProcessDef* p = model.find_process(t->callee);
        if (!p) throw EvalError("unknown process: " + t->callee);
        if (p->params.size() != t->args.size()) throw EvalError("call arity mismatch");
        if (want_label) lbl << t->callee << "(";
        Env env;
        for (std::size_t i = 0; i < t->args.size(); ++i) {
          long v = eval(t->args[i], s, f.env);
          env.emplace_back(nid(p->params[i]), narrow(v));
          if (want_label) {
            if (i) lbl << ",";
            lbl << v;
          }
        }
        if (want_label) lbl << ")";
        std::sort(env.begin(), env.end());
        push_term(stack, p->body.get(), env);
        break;
      }
      case Term::Kind::Seq:
        throw EvalError("sequence as an executable frame");
    }
    s.stacks[static_cast<std::size_t>(c)] = sid(stack);
    return want_label ? lbl.str() : std::string();
  }

  std::string encode(const State& s) const {
    std::string out;
    out.reserve(s.stacks.size() * 4 + s.bufs.size() * 3 + s.globals.size() * 2 + 16);
    for (uint32_t id : s.stacks) put_u32(out, id);
    for (const auto& buf : s.bufs) {
      put_u8(out, buf.size());
      for (int16_t v : buf) put_i16(out, v);
    }
    for (int16_t v : s.globals) put_i16(out, v);
    return out;
  }

  State decode(std::string_view key) const {
    State s;
    std::size_t p = 0;
    s.stacks.resize(static_cast<std::size_t>(ncomp));
    for (auto& id : s.stacks) id = get_u32(key, p);
    s.bufs.resize(static_cast<std::size_t>(total_slots));
    for (auto& buf : s.bufs) {
      unsigned n = get_u8(key, p);
      buf.resize(n);
      for (auto& v : buf) v = get_i16(key, p);
    }
    s.globals.resize(init_globals.size());
    for (auto& v : s.globals) v = get_i16(key, p);
    return s;
  }

  uint32_t intern(const std::string& key, uint32_t par, int comp, bool& fresh) {
    auto it = index.find(std::string_view(key));
    if (it != index.end()) {
      fresh = false;
      return it->second;
    }
    fresh = true;
    constexpr std::size_t kBlock = 1u << 22;
    if (key_blocks.empty() || key_blocks.back().size() + key.size() > key_blocks.back().capacity()) {
      key_blocks.emplace_back();
      key_blocks.back().reserve(kBlock);
    }
    std::string& blk = key_blocks.back();
    std::size_t at = blk.size();
    blk.append(key);
    std::string_view view(blk.data() + at, key.size());
    auto id = static_cast<uint32_t>(key_of.size());
    key_of.push_back(view);
    index.emplace(view, id);
    parent.push_back(par);
    via_comp.push_back(static_cast<int16_t>(comp));
    return id;
  }

  void note_fresh(const State& s) {
    for (std::size_t pi = 0; pi < model.predicates.size(); ++pi) {
      static const Env empty_env;
      pred_sat[pi].push_back(eval(model.predicates[pi].expr, s, empty_env) != 0 ? 1 : 0);
    }
    for (const auto& ch : chans) {
      auto& m = max_occ[ch.name];
      for (long i = 0; i < ch.size; ++i) {
        std::size_t n = s.bufs[static_cast<std::size_t>(ch.slot0 + i)].size() /
                        static_cast<std::size_t>(ch.width);
        if (n > m) m = n;
      }
    }
  }

  void note_monotone(const State& from, const State& to) {
    for (const auto& gv : gvars) {
      if (gv.size != 0) continue;
      if (to.globals[static_cast<std::size_t>(gv.offset)] <
          from.globals[static_cast<std::size_t>(gv.offset)])
        non_monotone.insert(gv.name);
    }
  }

  void explore() {
    if (explored) return;
    pred_sat.assign(model.predicates.size(), {});
    bool fresh;
    intern(encode(init_state), UINT32_MAX, -1, fresh);
    note_fresh(init_state);
    // BFS discovers ids in order, so expansion order equals id order and the
    // adjacency list can be built as a flat CSR array
    for (uint32_t id = 0; id < key_of.size(); ++id) {
      succ_off.push_back(static_cast<uint32_t>(succ_flat.size()));
      State s = decode(key_of[id]);
      std::vector<int> en = enabled(s);
      if (en.empty()) {
        terminals.push_back(id);
        bool all_done = true;
        for (uint32_t sid_ : s.stacks)
          if (!stack_table[sid_].empty()) all_done = false;
        if (all_done) proper_ends.push_back(id);
        else if (first_deadlock < 0) {
          first_deadlock = static_cast<long>(id);
          if (opt.stop_at_deadlock) {
            partial = true;
            break;
          }
        }
        continue;
      }
      for (int c : en) {
        State succ = s;
        apply(succ, c, false);
        ++edges;
        note_monotone(s, succ);
        bool is_new = false;
        uint32_t sid_ = intern(encode(succ), id, c, is_new);
        succ_flat.push_back(sid_);
        if (is_new) {
          if (key_of.size() > opt.state_limit) throw StateLimitExceeded(opt.state_limit);
          note_fresh(succ);
        }
      }
    }
    succ_off.push_back(static_cast<uint32_t>(succ_flat.size()));
    explored = true;
  }

  // ids along the BFS parent chain from the root to `id`, inclusive
  std::vector<uint32_t> path_ids(uint32_t id) const {
    std::vector<uint32_t> ids{id};
    while (parent[ids.back()] != UINT32_MAX) ids.push_back(parent[ids.back()]);
    std::reverse(ids.begin(), ids.end());
    return ids;
  }

  std::vector<TraceStep> steps_along(const std::vector<uint32_t>& ids) {
    std::vector<TraceStep> out;
    if (ids.empty()) return out;
    State s = decode(key_of[ids.front()]);
    for (std::size_t i = 1; i < ids.size(); ++i) {
      int c = find_edge_comp(s, ids[i]);
      std::string label = apply(s, c);
      out.push_back({c, std::move(label)});
    }
    return out;
  }

  // which component's action leads from state `s` to state id `to`
  int find_edge_comp(const State& s, uint32_t to) {
    for (int c : enabled(const_cast<State&>(s))) {
      State succ = s;
      apply(succ, c, false);
      auto it = index.find(std::string_view(encode(succ)));
      if (it != index.end() && it->second == to) return c;
    }
    throw EvalError("internal: edge not found during trace reconstruction");
  }

  std::size_t pred_index(const std::string& name) const {
    for (std::size_t i = 0; i < model.predicates.size(); ++i)
      if (model.predicates[i].name == name) return i;
    throw EvalError("unknown predicate: " + name);
  }
};

Explorer::Explorer(csp::CspModel model) : Explorer(std::move(model), Options{}) {}
Explorer::Explorer(csp::CspModel model, Options opt)
    : impl_(std::make_unique<Impl>(std::move(model), opt)) {}
Explorer::~Explorer() = default;

void Explorer::explore() { impl_->explore(); }

bool Explorer::partial() {
  impl_->explore();
  return impl_->partial;
}

std::size_t Explorer::num_states() {
  impl_->explore();
  return impl_->key_of.size();
}
std::size_t Explorer::num_edges() {
  impl_->explore();
  return impl_->edges;
}

Verdict Explorer::check_deadlockfree() {
  impl_->explore();
  Verdict v;
  v.property = "deadlockfree";
  v.states = impl_->key_of.size();
  v.edges = impl_->edges;
  if (impl_->first_deadlock >= 0) {
    v.holds = false;
    v.trace = impl_->steps_along(impl_->path_ids(static_cast<uint32_t>(impl_->first_deadlock)));
  }
  return v;
}

Verdict Explorer::check_reaches(const std::string& predicate) {
  impl_->explore();
  Verdict v;
  v.property = "reaches " + predicate;
  v.states = impl_->key_of.size();
  v.edges = impl_->edges;
  if (impl_->partial) throw EvalError("reachability check needs a complete search");
  const auto& sat = impl_->pred_sat[impl_->pred_index(predicate)];
  for (uint32_t id = 0; id < sat.size(); ++id) {
    if (sat[id]) {
      v.holds = true;
      v.trace = impl_->steps_along(impl_->path_ids(id));  // witness, not counterexample
      return v;
    }
  }
  v.holds = false;
  return v;
}

Verdict Explorer::check_always_eventually(const std::string& predicate) {
  impl_->explore();
  Verdict v;
  v.property = "[]<> " + predicate;
  v.states = impl_->key_of.size();
  v.edges = impl_->edges;
  if (impl_->partial) throw EvalError("liveness check needs a complete search");
  const auto& sat = impl_->pred_sat[impl_->pred_index(predicate)];

  // a run that ends must end in a state satisfying the predicate
  for (uint32_t id : impl_->terminals) {
    if (!sat[id]) {
      v.holds = false;
      v.trace = impl_->steps_along(impl_->path_ids(id));
      return v;
    }
  }

  // a cycle visiting only non-satisfying states starves the predicate forever
  const auto& off = impl_->succ_off;
  const auto& flat = impl_->succ_flat;
  std::vector<uint8_t> color(impl_->key_of.size(), 0);  // 0 white, 1 gray, 2 black
  struct DfsEntry {
    uint32_t id;
    uint32_t i;
  };
  for (uint32_t root = 0; root < impl_->key_of.size(); ++root) {
    if (sat[root] || color[root] != 0) continue;
    std::vector<DfsEntry> stack{{root, off[root]}};
    color[root] = 1;
    while (!stack.empty()) {
      DfsEntry& top = stack.back();
      if (top.i == off[top.id + 1]) {
        color[top.id] = 2;
        stack.pop_back();
        continue;
      }
      uint32_t nxt = flat[top.i++];
      if (sat[nxt]) continue;
      if (color[nxt] == 1) {
        // lasso: BFS stem to the cycle entry, then the cycle itself
        std::vector<uint32_t> cycle;
        std::size_t k = stack.size();
        while (k > 0 && stack[k - 1].id != nxt) --k;
        for (std::size_t j = k - 1; j < stack.size(); ++j) cycle.push_back(stack[j].id);
        cycle.push_back(nxt);  // close the loop

        v.holds = false;
        v.trace = impl_->steps_along(impl_->path_ids(nxt));
        v.lasso_start = v.trace.size();
        v.has_lasso = true;
        std::vector<TraceStep> loop = impl_->steps_along(cycle);
        v.trace.insert(v.trace.end(), loop.begin(), loop.end());
        return v;
      }
      if (color[nxt] == 0) {
        color[nxt] = 1;
        stack.push_back({nxt, off[nxt]});
      }
    }
  }
  return v;
}

ReplayResult Explorer::replay(const std::vector<TraceStep>& trace) const {
  Impl::State s = impl_->init_state;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::vector<int> en = impl_->enabled(s);
    if (std::find(en.begin(), en.end(), trace[i].component) == en.end())
      throw ReplayDivergence(i);
    std::string label = impl_->apply(s, trace[i].component);
    if (label != trace[i].label) throw ReplayDivergence(i);
  }
  ReplayResult r;
  r.steps = trace.size();
  std::vector<int> en = impl_->enabled(s);
  bool all_done = true;
  for (uint32_t sid_ : s.stacks)
    if (!impl_->stack_table[sid_].empty()) all_done = false;
  r.all_terminated = all_done;
  r.deadlocked = en.empty() && !all_done;
  for (const auto& gv : impl_->gvars)
    if (gv.size == 0) r.scalars[gv.name] = s.globals[static_cast<std::size_t>(gv.offset)];
  return r;
}

std::size_t Explorer::max_occupancy(const std::string& channel) {
  impl_->explore();
  auto it = impl_->max_occ.find(channel);
  if (it == impl_->max_occ.end()) throw EvalError("unknown channel: " + channel);
  return it->second;
}

bool Explorer::monotone_nondecreasing(const std::string& scalar_var) {
  impl_->explore();
  if (!impl_->gvar_by_name.count(scalar_var)) throw EvalError("unknown variable: " + scalar_var);
  return !impl_->non_monotone.count(scalar_var);
}

}  // namespace fla2csp::mc
