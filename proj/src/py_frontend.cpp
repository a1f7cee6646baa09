#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

#include "fla2csp/diag.hpp"
#include "fla2csp/pyast.hpp"

namespace fla2csp::py {

namespace {

struct Token {
  std::string text;
  int line;
  bool is_ident = false;
  bool is_int = false;
};

// One logical source line: indentation plus its token stream.
struct Line {
  int indent;
  int lineno;
  std::vector<Token> toks;
};

std::vector<Line> lex_lines(const std::string& source) {
  std::vector<Line> out;
  std::istringstream in(source);
  std::string raw;
  int lineno = 0;
  int pending_depth = 0;  // open ( and [ carry over to the next physical line
  while (std::getline(in, raw)) {
    ++lineno;
    // strip comment
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    // blank?
    if (raw.find_first_not_of(" \t") == std::string::npos) continue;

    int indent = 0;
    std::size_t i = 0;
    if (pending_depth == 0) {
      while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t')) {
        if (raw[i] == '\t') throw RestrictionViolation("tab indentation", lineno);
        ++indent;
        ++i;
      }
      out.push_back({indent, lineno, {}});
    } else {
      while (i < raw.size() && raw[i] == ' ') ++i;
    }
    Line& cur = out.back();
    while (i < raw.size()) {
      char c = raw[i];
      if (c == ' ' || c == '\t') {
        ++i;
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < raw.size() &&
               (std::isalnum(static_cast<unsigned char>(raw[j])) || raw[j] == '_'))
          ++j;
        cur.toks.push_back({raw.substr(i, j - i), lineno, true, false});
        i = j;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j]))) ++j;
        cur.toks.push_back({raw.substr(i, j - i), lineno, false, true});
        i = j;
        continue;
      }
      if (i + 1 < raw.size()) {
        std::string two = raw.substr(i, 2);
        if (two == "==" || two == "!=" || two == "<=" || two == ">=") {
          cur.toks.push_back({two, lineno});
          i += 2;
          continue;
        }
      }
      if (c == '(' || c == '[') ++pending_depth;
      if (c == ')' || c == ']') --pending_depth;
      if (std::string("()[]:,=.<>+-*").find(c) != std::string::npos) {
        cur.toks.push_back({std::string(1, c), lineno});
        ++i;
        continue;
      }
      throw SyntaxError(std::string("unexpected character '") + c + "'", lineno);
    }
  }
  return out;
}

class LineParser {
 public:
  explicit LineParser(const std::vector<Token>& toks) : toks_(toks) {}

  const Token& peek(std::size_t off = 0) const {
    static const Token eol{"<eol>", 0};
    return pos_ + off < toks_.size() ? toks_[pos_ + off] : eol;
  }
  bool at(const std::string& t) const { return peek().text == t; }
  bool done() const { return pos_ >= toks_.size(); }
  Token take() {
    if (done()) throw SyntaxError("unexpected end of line", line());
    return toks_[pos_++];
  }
  Token expect(const std::string& t) {
    if (!at(t)) throw SyntaxError("expected '" + t + "', got '" + peek().text + "'", line());
    return take();
  }
  std::string expect_ident() {
    if (!peek().is_ident)
      throw SyntaxError("expected identifier, got '" + peek().text + "'", line());
    return take().text;
  }
  int line() const {
    return toks_.empty() ? 0 : toks_[std::min(pos_, toks_.size() - 1)].line;
  }

  ExprPtr parse_expr() { return parse_cmp(); }

 private:
  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;

  ExprPtr mk(Expr e) {
    e.line = line();
    return std::make_shared<Expr>(std::move(e));
  }

  ExprPtr parse_cmp() {
    ExprPtr l = parse_add();
    while (at("==") || at("!=") || at("<") || at("<=") || at(">") || at(">=")) {
      std::string o = take().text;
      ExprPtr r = parse_add();
      Op op = o == "==" ? Op::Eq
              : o == "!=" ? Op::Ne
              : o == "<" ? Op::Lt
              : o == "<=" ? Op::Le
              : o == ">" ? Op::Gt
                          : Op::Ge;
      Expr e;
      e.kind = Expr::Kind::Binary;
      e.op = op;
      e.lhs = std::move(l);
      e.rhs = std::move(r);
      l = mk(std::move(e));
    }
    return l;
  }

  ExprPtr parse_add() {
    ExprPtr l = parse_mul();
    while (at("+") || at("-")) {
      Op op = take().text == "+" ? Op::Add : Op::Sub;
      ExprPtr r = parse_mul();
      Expr e;
      e.kind = Expr::Kind::Binary;
      e.op = op;
      e.lhs = std::move(l);
      e.rhs = std::move(r);
      l = mk(std::move(e));
    }
    return l;
  }

  ExprPtr parse_mul() {
    ExprPtr l = parse_primary();
    while (at("*")) {
      take();
      ExprPtr r = parse_primary();
      Expr e;
      e.kind = Expr::Kind::Binary;
      e.op = Op::Mul;
      e.lhs = std::move(l);
      e.rhs = std::move(r);
      l = mk(std::move(e));
    }
    return l;
  }

  ExprPtr parse_primary() {
    if (peek().is_int) {
      Expr e;
      e.kind = Expr::Kind::Int;
      e.value = std::stol(take().text);
      return mk(std::move(e));
    }
    if (at("(")) {
      take();
      ExprPtr e = parse_expr();
      expect(")");
      return e;
    }
    if (at("[")) {
      take();
      Expr e;
      e.kind = Expr::Kind::List;
      if (!at("]")) {
        e.elems.push_back(parse_expr());
        while (at(",")) {
          take();
          e.elems.push_back(parse_expr());
        }
      }
      expect("]");
      return mk(std::move(e));
    }
    if (peek().is_ident) {
      if (peek().text == "len" && peek(1).text == "(") {
        take();
        take();
        Expr e;
        e.kind = Expr::Kind::Len;
        e.name = expect_ident();
        expect(")");
        return mk(std::move(e));
      }
      std::string name = take().text;
      if (at("[")) {
        take();
        ExprPtr idx = parse_expr();
        expect("]");
        Expr e;
        e.kind = Expr::Kind::Subscript;
        e.name = std::move(name);
        e.lhs = std::move(idx);
        return mk(std::move(e));
      }
      if (at("(")) {
        // Calls never appear in expression position in the subset.
        throw RestrictionViolation("call: " + name, line());
      }
      Expr e;
      e.kind = Expr::Kind::Name;
      e.name = std::move(name);
      return mk(std::move(e));
    }
    throw SyntaxError("expected expression, got '" + peek().text + "'", line());
  }
};

class ProgramParser {
 public:
  explicit ProgramParser(std::vector<Line> lines) : lines_(std::move(lines)) {}

  PyProgram parse() {
    PyProgram prog;
    std::vector<std::pair<std::string, long>> top_consts;
    while (pos_ < lines_.size()) {
      const Line& ln = lines_[pos_];
      if (ln.indent != 0)
        throw SyntaxError("unexpected indentation at top level", ln.lineno);
      LineParser lp(ln.toks);
      if (lp.at("def")) {
        prog.functions.push_back(parse_def());
        continue;
      }
      check_banned(lp, ln.lineno);
      // top-level constant declaration: NAME = INT
      if (ln.toks.size() == 3 && ln.toks[0].is_ident && ln.toks[1].text == "=" &&
          ln.toks[2].is_int) {
        top_consts.emplace_back(ln.toks[0].text, std::stol(ln.toks[2].text));
        ++pos_;
        continue;
      }
      throw RestrictionViolation("top-level statement", ln.lineno);
    }
    if (prog.functions.empty()) throw SyntaxError("no function definition found", 0);

    extract_constants(prog, top_consts);
    return prog;
  }

 private:
  std::vector<Line> lines_;
  std::size_t pos_ = 0;

  static void check_banned(const LineParser& lp, int lineno) {
    static const char* banned[] = {"import", "from", "class", "return",
                                   "lambda", "global", "try",   "with"};
    for (const char* b : banned)
      if (lp.at(b)) throw RestrictionViolation(b, lineno);
  }

  PyFunc parse_def() {
    const Line& ln = lines_[pos_++];
    LineParser lp(ln.toks);
    lp.expect("def");
    PyFunc f;
    f.line = ln.lineno;
    f.name = lp.expect_ident();
    lp.expect("(");
    if (!lp.at(")")) {
      f.params.push_back(lp.expect_ident());
      while (lp.at(",")) {
        lp.take();
        f.params.push_back(lp.expect_ident());
      }
    }
    lp.expect(")");
    lp.expect(":");
    if (!lp.done()) throw SyntaxError("unexpected tokens after ':'", ln.lineno);
    f.body = parse_block(ln.indent);
    if (f.body.empty()) throw SyntaxError("empty function body", ln.lineno);
    return f;
  }

  // Parse statements strictly more indented than `parent_indent`.
  std::vector<Stmt> parse_block(int parent_indent) {
    std::vector<Stmt> out;
    if (pos_ >= lines_.size() || lines_[pos_].indent <= parent_indent) return out;
    int indent = lines_[pos_].indent;
    while (pos_ < lines_.size() && lines_[pos_].indent >= indent) {
      if (lines_[pos_].indent > indent)
        throw SyntaxError("unexpected indentation", lines_[pos_].lineno);
      out.push_back(parse_stmt(indent));
    }
    return out;
  }

  Stmt parse_stmt(int indent) {
    const Line& ln = lines_[pos_];
    LineParser lp(ln.toks);
    check_banned(lp, ln.lineno);
    Stmt s;
    s.line = ln.lineno;

    if (lp.at("def")) throw RestrictionViolation("nested def", ln.lineno);

    if (lp.at("for")) {
      ++pos_;
      lp.take();
      s.kind = Stmt::Kind::ForRange;
      s.counter = lp.expect_ident();
      lp.expect("in");
      if (!lp.at("range")) throw RestrictionViolation("for over non-range iterable", ln.lineno);
      lp.take();
      lp.expect("(");
      s.bound = lp.parse_expr();
      lp.expect(")");
      lp.expect(":");
      s.body = parse_block(indent);
      if (s.body.empty()) throw SyntaxError("empty loop body", ln.lineno);
      return s;
    }
    if (lp.at("while")) {
      ++pos_;
      lp.take();
      s.kind = Stmt::Kind::While;
      s.cond = lp.parse_expr();
      lp.expect(":");
      s.body = parse_block(indent);
      if (s.body.empty()) throw SyntaxError("empty loop body", ln.lineno);
      return s;
    }
    if (lp.at("if")) {
      ++pos_;
      lp.take();
      s.kind = Stmt::Kind::If;
      s.cond = lp.parse_expr();
      lp.expect(":");
      s.then_body = parse_block(indent);
      if (s.then_body.empty()) throw SyntaxError("empty if body", ln.lineno);
      if (pos_ < lines_.size() && lines_[pos_].indent == indent &&
          !lines_[pos_].toks.empty() && lines_[pos_].toks[0].text == "else") {
        LineParser elp(lines_[pos_].toks);
        elp.expect("else");
        elp.expect(":");
        ++pos_;
        s.else_body = parse_block(indent);
        if (s.else_body.empty()) throw SyntaxError("empty else body", ln.lineno);
      }
      return s;
    }
    if (lp.at("elif")) throw RestrictionViolation("elif", ln.lineno);
    if (lp.at("continue")) {
      ++pos_;
      lp.take();
      if (!lp.done()) throw SyntaxError("unexpected tokens after 'continue'", ln.lineno);
      s.kind = Stmt::Kind::Continue;
      return s;
    }

    // simple statement
    ++pos_;
    if (lp.peek().is_ident && lp.peek(1).text == "=") {
      s.target = lp.take().text;
      lp.take();  // '='
      // target = rcvMsg() | rcvMsgs(n) | list.pop(0) | expr
      if (lp.peek().is_ident && lp.peek(1).text == "(") {
        std::string fn = lp.peek().text;
        if (fn == "rcvMsg") {
          lp.take();
          lp.take();
          lp.expect(")");
          s.kind = Stmt::Kind::Mpapi;
          s.mpapi.kind = MpapiCall::Kind::Recv;
          s.mpapi.result = s.target;
          end_of_line(lp, ln.lineno);
          return s;
        }
        if (fn == "rcvMsgs") {
          lp.take();
          lp.take();
          s.kind = Stmt::Kind::Mpapi;
          s.mpapi.kind = MpapiCall::Kind::RecvMulti;
          s.mpapi.count = lp.parse_expr();
          s.mpapi.result = s.target;
          lp.expect(")");
          end_of_line(lp, ln.lineno);
          return s;
        }
      }
      if (lp.peek().is_ident && lp.peek(1).text == "." && lp.peek(2).text == "pop") {
        s.list = lp.take().text;
        lp.take();
        lp.take();
        lp.expect("(");
        if (!lp.peek().is_int || lp.peek().text != "0")
          throw RestrictionViolation("non-FIFO pop", ln.lineno);
        lp.take();
        lp.expect(")");
        end_of_line(lp, ln.lineno);
        s.kind = Stmt::Kind::ListPop;
        return s;
      }
      s.kind = Stmt::Kind::Assign;
      s.value = lp.parse_expr();
      end_of_line(lp, ln.lineno);
      return s;
    }

    if (lp.peek().is_ident && lp.peek(1).text == "." && lp.peek(2).text == "append") {
      s.list = lp.take().text;
      lp.take();
      lp.take();
      lp.expect("(");
      s.value = lp.parse_expr();
      lp.expect(")");
      end_of_line(lp, ln.lineno);
      s.kind = Stmt::Kind::ListAppend;
      return s;
    }

    if (lp.peek().is_ident && lp.peek(1).text == "(") {
      std::string fn = lp.take().text;
      lp.take();
      if (fn == "sendMsg") {
        s.kind = Stmt::Kind::Mpapi;
        s.mpapi.kind = MpapiCall::Kind::Send;
        s.mpapi.destination = lp.parse_expr();
        lp.expect(",");
        s.mpapi.message = lp.parse_expr();
        lp.expect(")");
        end_of_line(lp, ln.lineno);
        return s;
      }
      if (fn == "broadcastMsg") {
        s.kind = Stmt::Kind::Mpapi;
        s.mpapi.kind = MpapiCall::Kind::Broadcast;
        ExprPtr addresses = lp.parse_expr();
        if (addresses->kind != Expr::Kind::Name)
          throw RestrictionViolation("broadcastMsg addresses argument must be a name",
                                     ln.lineno);
        lp.expect(",");
        s.mpapi.message = lp.parse_expr();
        lp.expect(",");
        s.mpapi.sender = lp.parse_expr();
        lp.expect(")");
        end_of_line(lp, ln.lineno);
        return s;
      }
      if (fn.rfind("dropMsgs", 0) == 0) {
        s.kind = Stmt::Kind::DrainCall;
        s.drain_fn = fn;
        s.list = lp.expect_ident();
        lp.expect(")");
        end_of_line(lp, ln.lineno);
        return s;
      }
      throw RestrictionViolation("call: " + fn, ln.lineno);
    }

    throw RestrictionViolation("statement outside the subset", ln.lineno);
  }

  static void end_of_line(LineParser& lp, int lineno) {
    if (!lp.done())
      throw SyntaxError("unexpected tokens: '" + lp.peek().text + "'", lineno);
  }

  // Leading literal assignments of the entry function (and module level) are
  // constant declarations, split into field-index and phase constants.
  static void extract_constants(PyProgram& prog,
                                const std::vector<std::pair<std::string, long>>& top) {
    PyFunc& f = prog.functions.front();
    std::vector<std::pair<std::string, long>> consts(top);

    std::size_t prefix = 0;
    while (prefix < f.body.size() && f.body[prefix].kind == Stmt::Kind::Assign &&
           f.body[prefix].value->kind == Expr::Kind::Int &&
           f.body[prefix].target != "terminated") {
      consts.emplace_back(f.body[prefix].target, f.body[prefix].value->value);
      ++prefix;
    }

    // a candidate stays a constant only if never reassigned later
    std::set<std::string> reassigned;
    std::function<void(const std::vector<Stmt>&)> scan = [&](const std::vector<Stmt>& body) {
      for (const auto& st : body) {
        if (st.kind == Stmt::Kind::Assign || st.kind == Stmt::Kind::ListPop)
          reassigned.insert(st.target);
        if (st.kind == Stmt::Kind::Mpapi && !st.mpapi.result.empty())
          reassigned.insert(st.mpapi.result);
        scan(st.body);
        scan(st.then_body);
        scan(st.else_body);
      }
    };
    std::vector<Stmt> rest(f.body.begin() + static_cast<long>(prefix), f.body.end());
    scan(rest);

    // names used as message subscripts are field indices
    std::set<std::string> subscript_names;
    std::function<void(const ExprPtr&)> scan_e = [&](const ExprPtr& e) {
      if (!e) return;
      if (e->kind == Expr::Kind::Subscript && e->lhs->kind == Expr::Kind::Name)
        subscript_names.insert(e->lhs->name);
      scan_e(e->lhs);
      scan_e(e->rhs);
      for (const auto& el : e->elems) scan_e(el);
    };
    std::function<void(const std::vector<Stmt>&)> scan_s = [&](const std::vector<Stmt>& body) {
      for (const auto& st : body) {
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
    scan_s(rest);

    for (const auto& [name, value] : consts) {
      if (reassigned.count(name)) continue;
      if (subscript_names.count(name))
        prog.field_index_decls[name] = value;
      else
        prog.phase_constants[name] = value;
    }
    // drop the recognized prefix declarations from the body
    std::size_t kept_prefix = 0;
    for (std::size_t i = 0; i < prefix; ++i)
      if (reassigned.count(f.body[i].target)) f.body[kept_prefix++] = f.body[i];
    f.body.erase(f.body.begin() + static_cast<long>(kept_prefix),
                 f.body.begin() + static_cast<long>(prefix));
  }
};

}  // namespace

std::map<std::string, std::string> default_name_map() {
  return {
      {"noIterations", "NoIterations"}, {"noNodes", "NoNodes"},
      {"flSrvId", "FlSrvId"},           {"flSrvAddress", "FlSrvId"},
      {"noNeighbors", "NoNeighbors"},
  };
}

PyProgram parse_program(const std::string& source) {
  return ProgramParser(lex_lines(source)).parse();
}

namespace {

struct RestrictionChecker {
  const PyProgram& prog;
  const std::map<std::string, std::string>& name_map;
  const PyFunc& f;

  std::vector<std::string> fifo_lists;
  std::vector<std::string> mutable_vars;
  std::set<std::string> binders;  // rcvMsg/rcvMsgs/pop targets, cumulative

  RestrictionChecker(const PyProgram& p, const std::map<std::string, std::string>& nm)
      : prog(p), name_map(nm), f(p.functions.front()) {}

  bool is_constant(const std::string& n) const {
    return prog.field_index_decls.count(n) || prog.phase_constants.count(n) ||
           name_map.count(n);
  }

  void note_fifo(const std::string& n, int line) {
    if (is_constant(n)) throw RestrictionViolation("list operation on constant", line);
    if (std::find(fifo_lists.begin(), fifo_lists.end(), n) == fifo_lists.end())
      fifo_lists.push_back(n);
  }

  void note_mutable(const std::string& n) {
    if (std::find(mutable_vars.begin(), mutable_vars.end(), n) == mutable_vars.end())
      mutable_vars.push_back(n);
  }

  void check_expr(const ExprPtr& e, const std::set<std::string>& scope) {
    if (!e) return;
    switch (e->kind) {
      case Expr::Kind::Int:
        return;
      case Expr::Kind::Name:
        if (!scope.count(e->name) && !is_constant(e->name) && e->name != "terminated" &&
            std::find(mutable_vars.begin(), mutable_vars.end(), e->name) ==
                mutable_vars.end())
          throw UnresolvedName(e->name, e->line);
        return;
      case Expr::Kind::Subscript:
        if (!binders.count(e->name) && !scope.count(e->name))
          throw UnresolvedName(e->name, e->line);
        check_expr(e->lhs, scope);
        return;
      case Expr::Kind::Binary:
        check_expr(e->lhs, scope);
        check_expr(e->rhs, scope);
        return;
      case Expr::Kind::List:
        for (const auto& el : e->elems) check_expr(el, scope);
        return;
      case Expr::Kind::Len:
        note_fifo(e->name, e->line);
        return;
    }
  }

  void check_body(const std::vector<Stmt>& body, std::set<std::string> scope, int loop_depth) {
    for (std::size_t i = 0; i < body.size(); ++i) {
      const Stmt& s = body[i];
      switch (s.kind) {
        case Stmt::Kind::ForRange: {
          check_expr(s.bound, scope);
          auto inner = scope;
          inner.insert(s.counter);
          check_body(s.body, std::move(inner), loop_depth + 1);
          break;
        }
        case Stmt::Kind::While:
          check_expr(s.cond, scope);
          check_body(s.body, scope, loop_depth + 1);
          break;
        case Stmt::Kind::If:
          check_expr(s.cond, scope);
          check_body(s.then_body, scope, loop_depth);
          check_body(s.else_body, scope, loop_depth);
          break;
        case Stmt::Kind::Assign:
          check_expr(s.value, scope);
          if (s.target != "terminated") note_mutable(s.target);
          break;
        case Stmt::Kind::Mpapi:
          check_mpapi(s, scope);
          if (!s.mpapi.result.empty()) binders.insert(s.mpapi.result);
          break;
        case Stmt::Kind::ListAppend:
          note_fifo(s.list, s.line);
          check_expr(s.value, scope);
          break;
        case Stmt::Kind::ListPop:
          note_fifo(s.list, s.line);
          binders.insert(s.target);
          break;
        case Stmt::Kind::DrainCall:
          note_fifo(s.list, s.line);
          break;
        case Stmt::Kind::Continue:
          if (loop_depth == 0)
            throw RestrictionViolation("continue outside loop", s.line);
          if (i + 1 != body.size())
            throw RestrictionViolation("statements after continue", s.line);
          break;
      }
      if ((s.kind == Stmt::Kind::Mpapi && !s.mpapi.result.empty()) ||
          s.kind == Stmt::Kind::ListPop) {
        // binders flow into the remaining scope
        scope.insert(s.kind == Stmt::Kind::ListPop ? s.target : s.mpapi.result);
      }
    }
  }

  void check_mpapi(const Stmt& s, const std::set<std::string>& scope) {
    const MpapiCall& c = s.mpapi;
    switch (c.kind) {
      case MpapiCall::Kind::Send:
        check_expr(c.destination, scope);
        check_expr(c.message, scope);
        break;
      case MpapiCall::Kind::Recv:
        break;
      case MpapiCall::Kind::Broadcast:
        check_expr(c.message, scope);
        check_expr(c.sender, scope);
        break;
      case MpapiCall::Kind::RecvMulti:
        check_expr(c.count, scope);
        break;
    }
  }

  ValidatedProgram run() {
    if (prog.functions.size() != 1)
      throw RestrictionViolation("expected exactly one FLA function", 0);
    if (f.params.size() != 3)
      throw RestrictionViolation("FLA function must take (nodeId, localData, privateData)",
                                 f.line);
    if (f.body.empty() || f.body.back().kind != Stmt::Kind::Assign ||
        f.body.back().target != "terminated" ||
        f.body.back().value->kind != Expr::Kind::Int || f.body.back().value->value != 1)
      throw RestrictionViolation("final statement must be 'terminated = 1'", f.line);

    // field-index values must form 0..arity-1 and be unique
    if (!prog.field_index_decls.empty()) {
      std::set<long> values;
      for (const auto& [n, v] : prog.field_index_decls) {
        if (v < 0) throw RestrictionViolation("negative field index: " + n, 0);
        if (!values.insert(v).second)
          throw RestrictionViolation("duplicate field index value: " + n, 0);
      }
      long expect = 0;
      for (long v : values)
        if (v != expect++)
          throw RestrictionViolation("field index values are not contiguous from 0", 0);
    }

    std::set<std::string> scope(f.params.begin(), f.params.end());
    check_body(f.body, std::move(scope), 0);

    ValidatedProgram out;
    out.program = prog;
    out.fifo_lists = std::move(fifo_lists);
    out.mutable_vars = std::move(mutable_vars);
    return out;
  }
};

}  // namespace

ValidatedProgram validate_restrictions(const PyProgram& program,
                                       const std::map<std::string, std::string>& name_map) {
  return RestrictionChecker(program, name_map).run();
}

namespace {

struct ShapeInference {
  const ValidatedProgram& vp;
  MessageShapeMap shapes;
  std::map<std::string, std::string> binder_family;  // binder name -> family
  bool changed = false;

  explicit ShapeInference(const ValidatedProgram& v) : vp(v) {}

  void merge(const std::string& family, int arity, int line) {
    auto it = shapes.find(family);
    if (it == shapes.end()) {
      shapes[family] = {arity, {}};
      changed = true;
    } else if (it->second.arity != arity) {
      throw ShapeConflict(family, it->second.arity, arity, line);
    }
  }

  // arity of a message expression; binder names inherit their family's shape
  int message_arity(const ExprPtr& e) const {
    if (e->kind == Expr::Kind::List) return static_cast<int>(e->elems.size());
    if (e->kind == Expr::Kind::Name) {
      auto it = binder_family.find(e->name);
      if (it != binder_family.end()) {
        auto sh = shapes.find(it->second);
        if (sh != shapes.end()) return sh->second.arity;
        return -1;  // unknown yet
      }
    }
    return 1;
  }

  void walk(const std::vector<Stmt>& body) {
    for (const auto& s : body) {
      switch (s.kind) {
        case Stmt::Kind::Mpapi:
          switch (s.mpapi.kind) {
            case MpapiCall::Kind::Send:
            case MpapiCall::Kind::Broadcast: {
              int a = message_arity(s.mpapi.message);
              if (a > 0) merge("nodeChannels", a, s.line);
              break;
            }
            case MpapiCall::Kind::Recv:
            case MpapiCall::Kind::RecvMulti:
              if (!s.mpapi.result.empty()) {
                if (!binder_family.count(s.mpapi.result)) changed = true;
                binder_family[s.mpapi.result] = "nodeChannels";
              }
              break;
          }
          break;
        case Stmt::Kind::ListAppend: {
          int a = message_arity(s.value);
          if (a > 0) merge(s.list, a, s.line);
          break;
        }
        case Stmt::Kind::ListPop:
          if (!binder_family.count(s.target)) changed = true;
          binder_family[s.target] = s.list;
          break;
        default:
          break;
      }
      walk(s.body);
      walk(s.then_body);
      walk(s.else_body);
    }
  }

  MessageShapeMap run() {
    const PyFunc& f = vp.entry();
    // iterate to a fixpoint so list shapes fed by binders resolve
    for (int round = 0; round < 8; ++round) {
      changed = false;
      walk(f.body);
      if (!changed) break;
    }
    // every receive site on nodeChannels implies the family exists
    if (!shapes.count("nodeChannels")) {
      bool any_recv = false;
      std::function<void(const std::vector<Stmt>&)> scan = [&](const std::vector<Stmt>& b) {
        for (const auto& s : b) {
          if (s.kind == Stmt::Kind::Mpapi &&
              (s.mpapi.kind == MpapiCall::Kind::Recv ||
               s.mpapi.kind == MpapiCall::Kind::RecvMulti))
            any_recv = true;
          scan(s.body);
          scan(s.then_body);
          scan(s.else_body);
        }
      };
      scan(f.body);
      if (any_recv) shapes["nodeChannels"] = {1, {}};
    }
    // FIFO lists with only pops/drains default to the node shape
    for (const auto& l : vp.fifo_lists)
      if (!shapes.count(l) && shapes.count("nodeChannels"))
        shapes[l] = {shapes["nodeChannels"].arity, {}};

    // field names
    const auto& decls = vp.program.field_index_decls;
    std::vector<std::string> names_by_index(decls.size());
    for (const auto& [n, v] : decls) names_by_index[static_cast<std::size_t>(v)] = n;
    for (auto& [family, shape] : shapes) {
      if (shape.arity == 1) {
        shape.field_names = {"msg"};
      } else {
        if (decls.empty())
          throw MissingFieldNames("multi-field message on '" + family +
                                  "' without field-index declarations");
        if (static_cast<int>(names_by_index.size()) != shape.arity)
          throw ShapeConflict(family, static_cast<int>(names_by_index.size()), shape.arity);
        shape.field_names = names_by_index;
      }
    }
    return shapes;
  }
};

}  // namespace

MessageShapeMap infer_message_shapes(const ValidatedProgram& program) {
  return ShapeInference(program).run();
}

}  // namespace fla2csp::py
