#include <cctype>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fla2csp/cspast.hpp"
#include "fla2csp/diag.hpp"

namespace fla2csp::csp {

namespace {

struct Token {
  std::string text;
  int line;
  bool is_ident = false;
  bool is_int = false;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  const std::size_t n = src.size();
  auto push = [&](std::string t, bool id = false, bool num = false) {
    out.push_back({std::move(t), line, id, num});
  };
  while (i < n) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      i += 2;
      while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
        if (src[i] == '\n') ++line;
        ++i;
      }
      if (i + 1 >= n) throw SyntaxError("unterminated block comment", line);
      i += 2;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      push(src.substr(i, j - i), true);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      push(src.substr(i, j - i), false, true);
      i = j;
      continue;
    }
    if (c == '#') {
      std::size_t j = i + 1;
      while (j < n && std::isalpha(static_cast<unsigned char>(src[j]))) ++j;
      push(src.substr(i, j - i));
      i = j;
      continue;
    }
    auto two = [&](const char* t) {
      return i + 1 < n && src[i] == t[0] && src[i + 1] == t[1];
    };
    if (i + 2 < n && src[i] == '|' && src[i + 1] == '|' && src[i + 2] == '|') {
      push("|||");
      i += 3;
      continue;
    }
    for (const char* t : {"->", "==", "!=", "<=", ">=", "++", "--", "..", "|="}) {
      if (two(t)) {
        push(t);
        i += 2;
        goto next;
      }
    }
    if (std::string("{}()[];,.!?=<>+-*:@").find(c) != std::string::npos) {
      push(std::string(1, c));
      ++i;
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", line);
  next:;
  }
  push("<eof>");
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  CspModel parse() {
    CspModel m;
    while (!at("<eof>")) {
      if (at("enum")) {
        parse_enum(m);
      } else if (at("#define")) {
        parse_define(m);
      } else if (at("var")) {
        parse_var(m);
      } else if (at("channel")) {
        parse_channel(m);
      } else if (at("#assert")) {
        parse_assert(m);
      } else if (peek().is_ident) {
        parse_process_or_system(m);
      } else {
        throw SyntaxError("expected declaration, got '" + peek().text + "'", peek().line);
      }
    }
    return m;
  }

  ExprPtr parse_expr_only() {
    ExprPtr e = parse_expr();
    expect("<eof>");
    return e;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t off = 0) const {
    std::size_t i = pos_ + off;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(const std::string& t) const { return peek().text == t; }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  Token expect(const std::string& t) {
    if (!at(t))
      throw SyntaxError("expected '" + t + "', got '" + peek().text + "'", peek().line);
    return take();
  }
  std::string expect_ident() {
    if (!peek().is_ident)
      throw SyntaxError("expected identifier, got '" + peek().text + "'", peek().line);
    return take().text;
  }

  void parse_enum(CspModel& m) {
    take();
    expect("{");
    EnumDecl e;
    e.names.push_back(expect_ident());
    while (at(",")) {
      take();
      e.names.push_back(expect_ident());
    }
    expect("}");
    expect(";");
    m.enums.push_back(std::move(e));
  }

  void parse_define(CspModel& m) {
    take();
    std::string name = expect_ident();
    ExprPtr e = parse_expr();
    expect(";");
    // Comparison at the top level marks a boolean predicate definition.
    if (e->kind == Expr::Kind::Binary &&
        (e->op == BinOp::Eq || e->op == BinOp::Ne || e->op == BinOp::Lt ||
         e->op == BinOp::Le || e->op == BinOp::Gt || e->op == BinOp::Ge)) {
      m.predicates.push_back({std::move(name), std::move(e)});
    } else {
      m.defines.push_back({std::move(name), std::move(e)});
    }
  }

  void parse_var(CspModel& m) {
    take();
    VarDecl v;
    v.name = expect_ident();
    if (at("[")) {
      take();
      v.size = parse_expr();
      expect("]");
    }
    if (at("=")) {
      take();
      v.init = parse_expr();
    }
    expect(";");
    m.vars.push_back(std::move(v));
  }

  void parse_channel(CspModel& m) {
    take();
    ChanDecl c;
    c.name = expect_ident();
    expect("[");
    c.size = parse_expr();
    expect("]");
    c.capacity = parse_expr();
    expect(";");
    m.channels.push_back(std::move(c));
  }

  void parse_assert(CspModel& m) {
    take();
    Assertion a;
    a.system = expect_ident();
    expect("(");
    expect(")");
    if (at("deadlockfree")) {
      take();
      a.kind = Assertion::Kind::DeadlockFree;
    } else if (at("reaches")) {
      take();
      a.kind = Assertion::Kind::Reaches;
      a.predicate = expect_ident();
    } else if (at("|=")) {
      take();
      expect("[");
      expect("]");
      expect("<");
      expect(">");
      a.kind = Assertion::Kind::AlwaysEventually;
      a.predicate = expect_ident();
    } else {
      throw SyntaxError("expected 'deadlockfree', 'reaches' or '|='", peek().line);
    }
    expect(";");
    m.assertions.push_back(std::move(a));
  }

  void parse_process_or_system(CspModel& m) {
    int line = peek().line;
    std::string name = expect_ident();
    expect("(");
    std::vector<std::string> params;
    if (!at(")")) {
      params.push_back(expect_ident());
      while (at(",")) {
        take();
        params.push_back(expect_ident());
      }
    }
    expect(")");
    expect("=");
    if (at("|||")) {
      if (!params.empty())
        throw SyntaxError("system definition takes no parameters", line);
      take();
      SystemDef s;
      s.name = std::move(name);
      s.binder = expect_ident();
      expect(":");
      expect("{");
      s.lo = parse_expr();
      expect("..");
      s.hi = parse_expr();
      expect("}");
      expect("@");
      s.callee = expect_ident();
      expect("(");
      if (!at(")")) {
        s.args.push_back(parse_expr());
        while (at(",")) {
          take();
          s.args.push_back(parse_expr());
        }
      }
      expect(")");
      expect(";");
      if (m.system) throw SyntaxError("duplicate system definition", line);
      m.system = std::move(s);
      return;
    }
    ProcessDef p;
    p.name = std::move(name);
    p.params = std::move(params);
    p.line = line;
    p.body = parse_term();
    expect(";");
    m.processes.push_back(std::move(p));
  }

  // True when the upcoming tokens open a new top-level item, so a pending
  // ';' terminates the current process definition.
  bool at_new_item() const {
    const Token& t = peek();
    if (t.text == "<eof>" || t.text == "enum" || t.text == "var" ||
        t.text == "channel" || t.text == "#define" || t.text == "#assert")
      return true;
    if (!t.is_ident) return false;
    if (peek(1).text != "(") return false;
    // Scan to the matching ')' and look for '='.
    std::size_t i = pos_ + 2;
    int depth = 1;
    while (i < toks_.size() && depth > 0) {
      if (toks_[i].text == "(") ++depth;
      else if (toks_[i].text == ")") --depth;
      ++i;
    }
    return i < toks_.size() && toks_[i].text == "=";
  }

  bool at_term_start() const {
    const Token& t = peek();
    if (t.text == "Skip" || t.text == "if" || t.text == "{") return true;
    return t.is_ident && (peek(1).text == "(" || peek(1).text == "[");
  }

  TermPtr parse_term() {
    TermPtr head = parse_atom();
    if (at("->"))
      throw SyntaxError("expected ';' after process call, got '->'", peek().line);
    if (at(";") && !(peek(1).text == "<eof>")) {
      // Sequence only when a term follows; otherwise the ';' belongs to the
      // enclosing definition.
      std::size_t save = pos_;
      take();
      if (!at_new_item() && at_term_start()) {
        TermPtr rest = parse_term();
        return Term::seq(std::move(head), std::move(rest));
      }
      pos_ = save;
    }
    return head;
  }

  TermPtr parse_atom() {
    const Token& t = peek();
    int line = t.line;
    if (t.text == "Skip") {
      take();
      auto s = Term::skip();
      const_cast<Term&>(*s).line = line;
      return s;
    }
    if (t.text == "if") {
      take();
      expect("(");
      ExprPtr c = parse_expr();
      expect(")");
      expect("{");
      TermPtr th = parse_term();
      expect("}");
      TermPtr el;
      if (at("else")) {
        take();
        expect("{");
        el = parse_term();
        expect("}");
      }
      auto r = Term::cond(std::move(c), std::move(th), std::move(el));
      const_cast<Term&>(*r).line = line;
      return r;
    }
    if (t.text == "{") {
      take();
      std::vector<DataStmt> stmts;
      stmts.push_back(parse_data_stmt());
      while (at(";")) {
        take();
        stmts.push_back(parse_data_stmt());
      }
      expect("}");
      expect("->");
      TermPtr cont = parse_term();
      auto r = Term::data(std::move(stmts), std::move(cont));
      const_cast<Term&>(*r).line = line;
      return r;
    }
    if (t.is_ident) {
      std::string name = take().text;
      if (at("[")) {
        take();
        ExprPtr idx = parse_expr();
        expect("]");
        if (at("!")) {
          take();
          std::vector<ExprPtr> fields;
          fields.push_back(parse_field());
          while (at(".")) {
            take();
            fields.push_back(parse_field());
          }
          expect("->");
          TermPtr cont = parse_term();
          auto r = Term::out(std::move(name), std::move(idx), std::move(fields), std::move(cont));
          const_cast<Term&>(*r).line = line;
          return r;
        }
        if (at("?")) {
          take();
          std::vector<std::string> binds;
          binds.push_back(expect_ident());
          while (at(".")) {
            take();
            binds.push_back(expect_ident());
          }
          expect("->");
          TermPtr cont = parse_term();
          auto r = Term::in(std::move(name), std::move(idx), std::move(binds), std::move(cont));
          const_cast<Term&>(*r).line = line;
          return r;
        }
        throw SyntaxError("expected '!' or '?' after channel index", peek().line);
      }
      if (at("(")) {
        take();
        std::vector<ExprPtr> args;
        if (!at(")")) {
          args.push_back(parse_expr());
          while (at(",")) {
            take();
            args.push_back(parse_expr());
          }
        }
        expect(")");
        auto r = Term::call(std::move(name), std::move(args));
        const_cast<Term&>(*r).line = line;
        return r;
      }
      throw SyntaxError("expected process term; assignments must be braced: '{" +
                            name + " = ...} ->'",
                        line);
    }
    throw SyntaxError("expected process term, got '" + t.text + "'", line);
  }

  // Dotted fields bind tighter than expression operators.
  ExprPtr parse_field() {
    if (at("(")) {
      take();
      ExprPtr e = parse_expr();
      expect(")");
      return e;
    }
    if (peek().is_int) return Expr::lit(std::stol(take().text));
    std::string name = expect_ident();
    if (at("[")) {
      take();
      ExprPtr i = parse_expr();
      expect("]");
      return Expr::index(std::move(name), std::move(i));
    }
    return Expr::ident(std::move(name));
  }

  DataStmt parse_data_stmt() {
    DataStmt s;
    s.target = expect_ident();
    if (at("[")) {
      take();
      s.index = parse_expr();
      expect("]");
    }
    if (at("++")) {
      take();
      s.kind = DataStmt::Kind::Incr;
    } else if (at("--")) {
      take();
      s.kind = DataStmt::Kind::Decr;
    } else {
      expect("=");
      s.kind = DataStmt::Kind::Assign;
      s.value = parse_expr();
    }
    return s;
  }

  ExprPtr parse_expr() { return parse_cmp(); }

  ExprPtr parse_cmp() {
    ExprPtr l = parse_add();
    while (at("==") || at("!=") || at("<") || at("<=") || at(">") || at(">=")) {
      std::string op = take().text;
      ExprPtr r = parse_add();
      BinOp b = op == "==" ? BinOp::Eq
                : op == "!=" ? BinOp::Ne
                : op == "<" ? BinOp::Lt
                : op == "<=" ? BinOp::Le
                : op == ">" ? BinOp::Gt
                             : BinOp::Ge;
      l = Expr::bin(b, std::move(l), std::move(r));
    }
    return l;
  }

  ExprPtr parse_add() {
    ExprPtr l = parse_mul();
    while (at("+") || at("-")) {
      BinOp b = take().text == "+" ? BinOp::Add : BinOp::Sub;
      ExprPtr r = parse_mul();
      l = Expr::bin(b, std::move(l), std::move(r));
    }
    return l;
  }

  ExprPtr parse_mul() {
    ExprPtr l = parse_primary();
    while (at("*")) {
      take();
      ExprPtr r = parse_primary();
      l = Expr::bin(BinOp::Mul, std::move(l), std::move(r));
    }
    return l;
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    if (t.is_int) return Expr::lit(std::stol(take().text));
    if (t.text == "-") {
      take();
      return Expr::neg(parse_primary());
    }
    if (t.text == "(") {
      take();
      ExprPtr e = parse_expr();
      expect(")");
      return e;
    }
    if (t.text == "call") {
      take();
      expect("(");
      if (expect_ident() != "ccount")
        throw SyntaxError("only call(ccount, chan[idx]) is supported", t.line);
      expect(",");
      std::string chan = expect_ident();
      expect("[");
      ExprPtr idx = parse_expr();
      expect("]");
      expect(")");
      return Expr::ccount(std::move(chan), std::move(idx));
    }
    if (t.is_ident) {
      std::string name = take().text;
      if (at("[")) {
        take();
        ExprPtr i = parse_expr();
        expect("]");
        return Expr::index(std::move(name), std::move(i));
      }
      return Expr::ident(std::move(name));
    }
    throw SyntaxError("expected expression, got '" + t.text + "'", t.line);
  }
};

// --- validation -----------------------------------------------------------

struct Validator {
  const CspModel& m;
  std::set<std::string> enum_names, define_names, var_names, chan_names, pred_names;
  std::map<std::string, std::size_t> proc_arity;
  std::map<std::string, std::pair<std::size_t, int>> chan_width;  // name -> (width, line)

  explicit Validator(const CspModel& model) : m(model) {
    for (const auto& e : m.enums)
      for (const auto& n : e.names) enum_names.insert(n);
    for (const auto& d : m.defines) define_names.insert(d.name);
    for (const auto& v : m.vars) var_names.insert(v.name);
    for (const auto& c : m.channels) chan_names.insert(c.name);
    for (const auto& p : m.predicates) pred_names.insert(p.name);
    for (const auto& p : m.processes) {
      if (proc_arity.count(p.name))
        throw SyntaxError("duplicate process '" + p.name + "'", p.line);
      proc_arity[p.name] = p.params.size();
    }
  }

  bool is_const_name(const std::string& n) const {
    return enum_names.count(n) || define_names.count(n);
  }

  void check_const_expr(const ExprPtr& e, int line) const {
    switch (e->kind) {
      case Expr::Kind::Int: return;
      case Expr::Kind::Ident:
        if (!is_const_name(e->name))
          throw SyntaxError("'" + e->name + "' is not a constant", line);
        return;
      case Expr::Kind::Neg: check_const_expr(e->lhs, line); return;
      case Expr::Kind::Binary:
        check_const_expr(e->lhs, line);
        check_const_expr(e->rhs, line);
        return;
      default:
        throw SyntaxError("constant expression required", line);
    }
  }

  void check_expr(const ExprPtr& e, const std::set<std::string>& scope, int line) const {
    switch (e->kind) {
      case Expr::Kind::Int:
        return;
      case Expr::Kind::Ident:
        if (!scope.count(e->name) && !is_const_name(e->name) && !var_names.count(e->name))
          throw UnresolvedName(e->name, line);
        return;
      case Expr::Kind::Index:
        if (!var_names.count(e->name))
          throw SyntaxError("'" + e->name + "' is not a declared var array", line);
        check_expr(e->lhs, scope, line);
        return;
      case Expr::Kind::Neg:
        check_expr(e->lhs, scope, line);
        return;
      case Expr::Kind::Binary:
        check_expr(e->lhs, scope, line);
        check_expr(e->rhs, scope, line);
        return;
      case Expr::Kind::CCount:
        if (!chan_names.count(e->name))
          throw SyntaxError("'" + e->name + "' is not a declared channel", line);
        check_expr(e->lhs, scope, line);
        return;
    }
  }

  void note_width(const std::string& chan, std::size_t w, int line) {
    auto it = chan_width.find(chan);
    if (it == chan_width.end()) {
      chan_width[chan] = {w, line};
    } else if (it->second.first != w) {
      throw ArityMismatch(chan, line);
    }
  }

  void check_term(const TermPtr& t, std::set<std::string> scope) {
    switch (t->kind) {
      case Term::Kind::Skip:
        return;
      case Term::Kind::DataOp:
        for (const auto& s : t->stmts) {
          if (!var_names.count(s.target))
            throw SyntaxError("assignment to undeclared var '" + s.target + "'", t->line);
          if (s.index) check_expr(s.index, scope, t->line);
          if (s.value) check_expr(s.value, scope, t->line);
        }
        check_term(t->cont, std::move(scope));
        return;
      case Term::Kind::ChanOut:
        if (!chan_names.count(t->chan))
          throw SyntaxError("'" + t->chan + "' is not a declared channel", t->line);
        check_expr(t->chan_index, scope, t->line);
        for (const auto& f : t->fields) check_expr(f, scope, t->line);
        note_width(t->chan, t->fields.size(), t->line);
        check_term(t->cont, std::move(scope));
        return;
      case Term::Kind::ChanIn:
        if (!chan_names.count(t->chan))
          throw SyntaxError("'" + t->chan + "' is not a declared channel", t->line);
        check_expr(t->chan_index, scope, t->line);
        note_width(t->chan, t->binds.size(), t->line);
        for (const auto& b : t->binds) scope.insert(b);
        check_term(t->cont, std::move(scope));
        return;
      case Term::Kind::Cond:
        check_expr(t->guard, scope, t->line);
        check_term(t->then_t, scope);
        if (t->else_t) check_term(t->else_t, scope);
        return;
      case Term::Kind::Call: {
        auto it = proc_arity.find(t->callee);
        if (it == proc_arity.end())
          throw SyntaxError("call to undefined process '" + t->callee + "'", t->line);
        if (it->second != t->args.size())
          throw SyntaxError("process '" + t->callee + "' expects " +
                                std::to_string(it->second) + " arguments, got " +
                                std::to_string(t->args.size()),
                            t->line);
        for (const auto& a : t->args) check_expr(a, scope, t->line);
        return;
      }
      case Term::Kind::Seq:
        check_term(t->first, scope);
        check_term(t->second, std::move(scope));
        return;
    }
  }

  void run() {
    for (const auto& d : m.defines) check_const_expr(d.value, 0);
    for (const auto& v : m.vars) {
      if (v.size) {
        check_const_expr(v.size, 0);
        if (eval_const(m, v.size) < 1)
          throw SyntaxError("var '" + v.name + "' has non-positive size", 0);
      }
      if (v.init) check_const_expr(v.init, 0);
    }
    for (const auto& c : m.channels) {
      check_const_expr(c.size, 0);
      check_const_expr(c.capacity, 0);
      if (eval_const(m, c.size) < 1)
        throw SyntaxError("channel '" + c.name + "' has non-positive size", 0);
      if (eval_const(m, c.capacity) < 1)
        throw SyntaxError("channel '" + c.name + "' has capacity < 1", 0);
    }
    for (const auto& p : m.processes) {
      std::set<std::string> scope(p.params.begin(), p.params.end());
      check_term(p.body, std::move(scope));
    }
    if (m.system) {
      const auto& s = *m.system;
      check_const_expr(s.lo, 0);
      check_const_expr(s.hi, 0);
      auto it = proc_arity.find(s.callee);
      if (it == proc_arity.end())
        throw SyntaxError("system calls undefined process '" + s.callee + "'", 0);
      if (it->second != s.args.size())
        throw SyntaxError("system call arity mismatch for '" + s.callee + "'", 0);
      std::set<std::string> scope{s.binder};
      for (const auto& a : s.args) check_expr(a, scope, 0);
    }
    for (const auto& p : m.predicates) {
      std::set<std::string> scope;
      check_expr(p.expr, scope, 0);
    }
    for (const auto& a : m.assertions) {
      if (!m.system || m.system->name != a.system)
        throw SyntaxError("assertion references unknown system '" + a.system + "'", 0);
      if (a.kind != Assertion::Kind::DeadlockFree && !pred_names.count(a.predicate))
        throw SyntaxError("assertion references undefined predicate '" + a.predicate + "'", 0);
    }
  }
};

}  // namespace

void validate_model(const CspModel& model) { Validator(model).run(); }

CspModel parse_model(const std::string& text) {
  CspModel m = Parser(lex(text)).parse();
  validate_model(m);
  return m;
}

ExprPtr parse_expr_text(const std::string& text) {
  return Parser(lex(text)).parse_expr_only();
}

}  // namespace fla2csp::csp
