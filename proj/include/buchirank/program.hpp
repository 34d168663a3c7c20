#pragma once

#include <cctype>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "buchirank/transition_system.hpp"

namespace buchirank {

struct ParseError : std::runtime_error {
  int line;
  ParseError(int ln, const std::string& msg)
      : std::runtime_error("line " + std::to_string(ln) + ": " + msg), line(ln) {}
};

// ---- source-level AST (kept around for pretty-printing / round-trips) ----

struct PExpr {
  enum class Kind { Const, Var, Add, Sub, Mul, Neg, Pow };
  Kind kind = Kind::Const;
  Rational value;            // Const
  std::string var;           // Var
  unsigned exponent = 0;     // Pow
  std::vector<PExpr> args;   // operands
};

struct PPred {
  enum class Kind { True, False, Cmp, Not, And, Or };
  enum class Op { Geq, Gt, Leq, Lt, Eq };
  Kind kind = Kind::True;
  Op op = Op::Geq;
  std::vector<PExpr> sides;  // Cmp: lhs, rhs
  std::vector<PPred> args;
};

struct Stmt {
  enum class Kind { While, IfPred, IfStar, Assign, Skip, Assert, Assume };
  Kind kind = Kind::Skip;
  std::string label;                       // empty when unlabeled
  PPred pred;                              // While / IfPred / Assert / Assume
  std::string target;                      // Assign
  PExpr expr;                              // Assign
  std::vector<std::vector<Stmt>> blocks;   // While: 1, IfPred: 1-2, IfStar: >=2
};

struct ProgramAst {
  bool has_pre = false;
  PPred pre;
  std::vector<std::pair<std::string, PPred>> invariants;
  std::vector<Stmt> body;
  std::string trailing_label;
};

// ---- tokenizer ----

namespace detail {

struct Token {
  enum class Kind { Ident, Number, Op, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
};

inline std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> toks;
  int line = 1;
  std::size_t i = 0;
  auto push = [&](Token::Kind k, std::string t) { toks.push_back({k, std::move(t), line}); };
  while (i < src.size()) {
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
    if (c == '#') {  // comment to end of line
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      push(Token::Kind::Ident, src.substr(i, j - i));
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      push(Token::Kind::Number, src.substr(i, j - i));
      i = j;
      continue;
    }
    static const char* two[] = {">=", "<=", "==", "&&", "||", "=>", "->"};
    bool matched = false;
    for (const char* op : two) {
      if (src.compare(i, 2, op) == 0) {
        push(Token::Kind::Op, op);
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static const std::string single = "+-*/^<>()=:!,;";
    if (single.find(c) != std::string::npos) {
      push(Token::Kind::Op, std::string(1, c));
      ++i;
      continue;
    }
    throw ParseError(line, std::string("unexpected character '") + c + "'");
  }
  toks.push_back({Token::Kind::End, "", line});
  return toks;
}

inline bool is_keyword(const std::string& s) {
  static const char* kw[] = {"pre",  "invariant", "while", "do",     "done",
                             "if",   "then",      "else",  "elif",   "fi",
                             "skip", "assert",    "assume", "true",  "false"};
  for (const char* k : kw)
    if (s == k) return true;
  return false;
}

class ProgramParser {
 public:
  explicit ProgramParser(const std::string& src) : toks_(tokenize(src)) {}

  ProgramAst parse() {
    ProgramAst ast;
    while (true) {
      if (peek_ident("pre")) {
        if (ast.has_pre) fail("duplicate pre header");
        next();
        expect_op(":");
        ast.pre = parse_pred();
        ast.has_pre = true;
        continue;
      }
      if (peek_ident("invariant")) {
        next();
        std::string label = expect_ident();
        expect_op(":");
        ast.invariants.emplace_back(label, parse_pred());
        continue;
      }
      break;
    }
    ast.body = parse_block({"<end>"});
    if (cur().kind == Token::Kind::Ident && peek_op_at(1, ":") &&
        toks_[pos_ + 2].kind == Token::Kind::End) {
      ast.trailing_label = next().text;
      next();  // ':'
    }
    if (cur().kind != Token::Kind::End) fail("unexpected trailing input '" + cur().text + "'");
    return ast;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& cur() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(cur().line, msg); }

  bool peek_ident(const std::string& s, std::size_t ahead = 0) const {
    const Token& t = toks_[pos_ + ahead];
    return t.kind == Token::Kind::Ident && t.text == s;
  }
  bool peek_op(const std::string& s) const {
    return cur().kind == Token::Kind::Op && cur().text == s;
  }
  bool peek_op_at(std::size_t ahead, const std::string& s) const {
    const Token& t = toks_[pos_ + ahead];
    return t.kind == Token::Kind::Op && t.text == s;
  }
  void expect_op(const std::string& s) {
    if (!peek_op(s)) fail("expected '" + s + "', found '" + cur().text + "'");
    next();
  }
  std::string expect_ident() {
    if (cur().kind != Token::Kind::Ident) fail("expected identifier, found '" + cur().text + "'");
    return next().text;
  }
  void expect_keyword(const std::string& s) {
    if (!peek_ident(s)) fail("expected '" + s + "', found '" + cur().text + "'");
    next();
  }

  bool at_block_end(const std::vector<std::string>& stops) const {
    for (const auto& s : stops) {
      if (s == "<end>" && cur().kind == Token::Kind::End) return true;
      if (peek_ident(s)) return true;
    }
    // A trailing "name :" followed by end-of-input closes the program body.
    if (cur().kind == Token::Kind::Ident && peek_op_at(1, ":") &&
        toks_[pos_ + 2].kind == Token::Kind::End)
      return true;
    return false;
  }

  std::vector<Stmt> parse_block(const std::vector<std::string>& stops) {
    std::vector<Stmt> out;
    while (!at_block_end(stops)) {
      out.push_back(parse_stmt());
      while (peek_op(";")) next();
    }
    return out;
  }

  Stmt parse_stmt() {
    Stmt s;
    if (cur().kind == Token::Kind::Ident && !is_keyword(cur().text) && peek_op_at(1, ":")) {
      s.label = next().text;
      if (s.label.rfind("_s", 0) == 0) fail("labels starting with '_s' are reserved");
      next();  // ':'
    }
    if (peek_ident("while")) {
      next();
      s.kind = Stmt::Kind::While;
      s.pred = parse_pred();
      expect_keyword("do");
      s.blocks.push_back(parse_block({"done"}));
      expect_keyword("done");
      return s;
    }
    if (peek_ident("if")) {
      next();
      if (peek_op("*")) {
        next();
        s.kind = Stmt::Kind::IfStar;
        expect_keyword("then");
        s.blocks.push_back(parse_block({"elif", "else", "fi"}));
        while (peek_ident("elif")) {
          next();
          expect_op("*");
          expect_keyword("then");
          s.blocks.push_back(parse_block({"elif", "else", "fi"}));
        }
        expect_keyword("else");
        s.blocks.push_back(parse_block({"fi"}));
        expect_keyword("fi");
        return s;
      }
      s.kind = Stmt::Kind::IfPred;
      s.pred = parse_pred();
      expect_keyword("then");
      s.blocks.push_back(parse_block({"else", "fi"}));
      if (peek_ident("else")) {
        next();
        s.blocks.push_back(parse_block({"fi"}));
      }
      expect_keyword("fi");
      return s;
    }
    if (peek_ident("skip")) {
      next();
      s.kind = Stmt::Kind::Skip;
      return s;
    }
    if (peek_ident("assert") || peek_ident("assume")) {
      s.kind = cur().text == "assert" ? Stmt::Kind::Assert : Stmt::Kind::Assume;
      next();
      expect_op("(");
      s.pred = parse_pred();
      expect_op(")");
      return s;
    }
    if (cur().kind == Token::Kind::Ident && !is_keyword(cur().text) && peek_op_at(1, "=")) {
      s.kind = Stmt::Kind::Assign;
      s.target = next().text;
      next();  // '='
      s.expr = parse_expr();
      return s;
    }
    fail("expected statement, found '" + cur().text + "'");
  }

  // predicates: '!' > comparisons > '&&' > '||' > '=>'
  PPred parse_pred() { return parse_impl(); }

  PPred parse_impl() {
    PPred lhs = parse_or();
    if (peek_op("=>") || peek_op("->")) {
      next();
      PPred rhs = parse_impl();
      PPred neg;
      neg.kind = PPred::Kind::Not;
      neg.args.push_back(std::move(lhs));
      PPred out;
      out.kind = PPred::Kind::Or;
      out.args.push_back(std::move(neg));
      out.args.push_back(std::move(rhs));
      return out;
    }
    return lhs;
  }

  PPred parse_or() {
    PPred lhs = parse_and();
    while (peek_op("||")) {
      next();
      PPred rhs = parse_and();
      if (lhs.kind != PPred::Kind::Or) {
        PPred tmp;
        tmp.kind = PPred::Kind::Or;
        tmp.args.push_back(std::move(lhs));
        lhs = std::move(tmp);
      }
      lhs.args.push_back(std::move(rhs));
    }
    return lhs;
  }

  PPred parse_and() {
    PPred lhs = parse_punary();
    while (peek_op("&&")) {
      next();
      PPred rhs = parse_punary();
      if (lhs.kind != PPred::Kind::And) {
        PPred tmp;
        tmp.kind = PPred::Kind::And;
        tmp.args.push_back(std::move(lhs));
        lhs = std::move(tmp);
      }
      lhs.args.push_back(std::move(rhs));
    }
    return lhs;
  }

  PPred parse_punary() {
    if (peek_op("!")) {
      next();
      PPred p;
      p.kind = PPred::Kind::Not;
      p.args.push_back(parse_punary());
      return p;
    }
    if (peek_ident("true")) {
      next();
      PPred p;
      p.kind = PPred::Kind::True;
      return p;
    }
    if (peek_ident("false")) {
      next();
      PPred p;
      p.kind = PPred::Kind::False;
      return p;
    }
    if (peek_op("(")) {
      // Either a parenthesized predicate or a parenthesized expression that
      // starts a comparison; try predicate first by scanning for a comparison
      // operator at depth 0 after the closing paren.
      std::size_t save = pos_;
      next();
      try {
        PPred p = parse_pred();
        expect_op(")");
        if (peek_cmp_op()) {
          // "(expr) < expr" case: re-parse as comparison.
          pos_ = save;
          return parse_cmp();
        }
        return p;
      } catch (const ParseError&) {
        pos_ = save;
        return parse_cmp();
      }
    }
    return parse_cmp();
  }

  bool peek_cmp_op() const {
    if (cur().kind != Token::Kind::Op) return false;
    const std::string& t = cur().text;
    return t == ">=" || t == ">" || t == "<=" || t == "<" || t == "==";
  }

  PPred parse_cmp() {
    PPred p;
    p.kind = PPred::Kind::Cmp;
    p.sides.push_back(parse_expr());
    if (!peek_cmp_op()) fail("expected comparison operator, found '" + cur().text + "'");
    std::string op = next().text;
    p.sides.push_back(parse_expr());
    if (op == ">=")
      p.op = PPred::Op::Geq;
    else if (op == ">")
      p.op = PPred::Op::Gt;
    else if (op == "<=")
      p.op = PPred::Op::Leq;
    else if (op == "<")
      p.op = PPred::Op::Lt;
    else
      p.op = PPred::Op::Eq;
    return p;
  }

  PExpr parse_expr() {
    PExpr lhs = parse_term();
    while (peek_op("+") || peek_op("-")) {
      bool add = next().text == "+";
      PExpr rhs = parse_term();
      PExpr out;
      out.kind = add ? PExpr::Kind::Add : PExpr::Kind::Sub;
      out.args.push_back(std::move(lhs));
      out.args.push_back(std::move(rhs));
      lhs = std::move(out);
    }
    return lhs;
  }

  PExpr parse_term() {
    PExpr lhs = parse_factor();
    while (peek_op("*")) {
      next();
      PExpr rhs = parse_factor();
      PExpr out;
      out.kind = PExpr::Kind::Mul;
      out.args.push_back(std::move(lhs));
      out.args.push_back(std::move(rhs));
      lhs = std::move(out);
    }
    return lhs;
  }

  PExpr parse_factor() {
    if (peek_op("-")) {
      next();
      PExpr inner = parse_factor();
      PExpr out;
      out.kind = PExpr::Kind::Neg;
      out.args.push_back(std::move(inner));
      return out;
    }
    PExpr base = parse_atom();
    if (peek_op("^")) {
      next();
      if (cur().kind != Token::Kind::Number) fail("expected integer exponent");
      PExpr out;
      out.kind = PExpr::Kind::Pow;
      out.exponent = static_cast<unsigned>(std::stoul(next().text));
      out.args.push_back(std::move(base));
      return out;
    }
    return base;
  }

  PExpr parse_atom() {
    if (peek_op("(")) {
      next();
      PExpr e = parse_expr();
      expect_op(")");
      return e;
    }
    if (cur().kind == Token::Kind::Number) {
      int ln = cur().line;
      std::string num = next().text;
      // Division is only a rational literal "a/b".
      if (peek_op("/")) {
        next();
        if (cur().kind != Token::Kind::Number) fail("expected denominator");
        num += "/" + next().text;
      }
      PExpr e;
      e.kind = PExpr::Kind::Const;
      try {
        e.value = parse_rational(num);
      } catch (const std::invalid_argument& ex) {
        throw ParseError(ln, ex.what());
      }
      return e;
    }
    if (cur().kind == Token::Kind::Ident && !is_keyword(cur().text)) {
      PExpr e;
      e.kind = PExpr::Kind::Var;
      e.var = next().text;
      return e;
    }
    fail("expected expression, found '" + cur().text + "'");
  }
};

// Records every variable in first-occurrence order.
struct VarCollector {
  std::vector<std::string> names;

  void see(const std::string& v) {
    for (const auto& n : names)
      if (n == v) return;
    names.push_back(v);
  }
  void walk(const PExpr& e) {
    if (e.kind == PExpr::Kind::Var) see(e.var);
    for (const auto& a : e.args) walk(a);
  }
  void walk(const PPred& p) {
    for (const auto& s : p.sides) walk(s);
    for (const auto& a : p.args) walk(a);
  }
  void walk(const Stmt& s) {
    if (s.kind == Stmt::Kind::Assign) see(s.target);
    walk(s.pred);
    if (s.kind == Stmt::Kind::Assign) walk(s.expr);
    for (const auto& b : s.blocks)
      for (const auto& st : b) walk(st);
  }
};

}  // namespace detail

inline ProgramAst parse_program_ast(const std::string& src) {
  return detail::ProgramParser(src).parse();
}

namespace detail {

inline Polynomial lower_expr(const PExpr& e, const TransitionSystem& ts) {
  switch (e.kind) {
    case PExpr::Kind::Const:
      return Polynomial::constant(ts.nvars(), e.value);
    case PExpr::Kind::Var: {
      auto v = ts.find_var(e.var);
      if (!v) throw ParseError(0, "unknown variable " + e.var);
      return Polynomial::variable(ts.nvars(), *v);
    }
    case PExpr::Kind::Add:
      return lower_expr(e.args[0], ts) + lower_expr(e.args[1], ts);
    case PExpr::Kind::Sub:
      return lower_expr(e.args[0], ts) - lower_expr(e.args[1], ts);
    case PExpr::Kind::Mul:
      return lower_expr(e.args[0], ts) * lower_expr(e.args[1], ts);
    case PExpr::Kind::Neg:
      return -lower_expr(e.args[0], ts);
    case PExpr::Kind::Pow:
      return lower_expr(e.args[0], ts).pow(e.exponent);
  }
  return Polynomial(ts.nvars());
}

inline Predicate lower_pred(const PPred& p, const TransitionSystem& ts) {
  switch (p.kind) {
    case PPred::Kind::True:
      return Predicate::mk_true();
    case PPred::Kind::False:
      return Predicate::mk_false();
    case PPred::Kind::Not:
      return Predicate::mk_not(lower_pred(p.args[0], ts));
    case PPred::Kind::And:
    case PPred::Kind::Or: {
      std::vector<Predicate> cs;
      for (const auto& a : p.args) cs.push_back(lower_pred(a, ts));
      return p.kind == PPred::Kind::And ? Predicate::mk_and(std::move(cs))
                                        : Predicate::mk_or(std::move(cs));
    }
    case PPred::Kind::Cmp: {
      Polynomial lhs = lower_expr(p.sides[0], ts);
      Polynomial rhs = lower_expr(p.sides[1], ts);
      switch (p.op) {
        case PPred::Op::Geq:
          return Predicate::mk_atom(Atom::geq(lhs - rhs));
        case PPred::Op::Gt:
          return Predicate::mk_atom(Atom::gt(lhs - rhs));
        case PPred::Op::Leq:
          return Predicate::mk_atom(Atom::geq(rhs - lhs));
        case PPred::Op::Lt:
          return Predicate::mk_atom(Atom::gt(rhs - lhs));
        case PPred::Op::Eq:
          return Predicate::mk_and(Predicate::mk_atom(Atom::geq(lhs - rhs)),
                                   Predicate::mk_atom(Atom::geq(rhs - lhs)));
      }
    }
  }
  return Predicate::mk_true();
}

// A statement entry point: a concrete location, or (for an unlabeled
// non-deterministic branch) a fork that distributes incoming edges over the
// branch entries.
struct EntryRef {
  std::vector<LocationId> targets;
};

class Flattener {
 public:
  explicit Flattener(const ProgramAst& ast) : ast_(ast) {}

  // Gives every location-owning statement without a user label a synthetic
  // one, numbered in textual order (the flattener itself walks blocks
  // backwards, so it cannot assign them in source order).
  static void label_pass(std::vector<Stmt>& stmts, int& k) {
    for (auto& s : stmts) {
      bool owns_location = s.kind != Stmt::Kind::IfStar || !s.label.empty();
      if (s.label.empty() && owns_location) s.label = "_s" + std::to_string(k++);
      for (auto& b : s.blocks) label_pass(b, k);
    }
  }

  TransitionSystem run() {
    detail::VarCollector vars;
    if (ast_.has_pre) vars.walk(ast_.pre);
    for (const auto& [lbl, p] : ast_.invariants) vars.walk(p);
    for (const auto& s : ast_.body) vars.walk(s);
    ts_.var_names = vars.names;

    ts_.init = ts_.add_location("l_init");
    ts_.theta_init = ast_.has_pre ? lower_pred(ast_.pre, ts_) : Predicate::mk_true();

    std::string term_name =
        ast_.trailing_label.empty() ? std::string("l_t") : ast_.trailing_label;
    LocationId term = ts_.add_location(term_name);
    ts_.terminal = term;

    std::vector<Stmt> body = ast_.body;
    int synth = 0;
    label_pass(body, synth);
    EntryRef body_entry = flatten_block(body, {{term}});
    link(ts_.init, body_entry, Predicate::mk_true(), identity_update(ts_.nvars()));
    ts_.transitions.push_back(
        {term, term, Predicate::mk_true(), identity_update(ts_.nvars())});

    // Transition declaration order follows textual order: sort by the
    // sequence numbers recorded while flattening.
    std::stable_sort(order_.begin(), order_.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Transition> ordered;
    ordered.reserve(order_.size());
    for (auto& [seq, t] : order_) ordered.push_back(std::move(t));
    for (auto& t : ts_.transitions) ordered.push_back(std::move(t));
    ts_.transitions = std::move(ordered);

    for (const auto& [lbl, p] : ast_.invariants) {
      auto loc = ts_.find_location(lbl);
      if (!loc) throw ParseError(0, "invariant for unknown label " + lbl);
      Predicate lowered = lower_pred(p, ts_);
      Predicate& slot = ts_.invariants[*loc];
      slot = slot.is_true() ? lowered : Predicate::mk_and(slot, lowered);
    }
    return ts_;
  }

 private:
  const ProgramAst& ast_;
  TransitionSystem ts_;
  std::vector<std::pair<int, Transition>> order_;
  int seq_ = 0;
  int synth_ = 0;

  LocationId fresh_loc(const std::string& label) {
    std::string name = label.empty() ? "_s" + std::to_string(synth_++) : label;
    if (!label.empty())
      for (const auto& n : ts_.location_names)
        if (n == label) throw ParseError(0, "duplicate label " + label);
    return ts_.add_location(name);
  }

  void link(LocationId src, const EntryRef& dst, const Predicate& guard,
            const std::vector<Polynomial>& update) {
    for (LocationId t : dst.targets) order_.emplace_back(seq_++, Transition{src, t, guard, update});
  }

  Predicate negation(const Predicate& p) {
    auto dnf = to_dnf(Predicate::mk_not(p));
    std::vector<Predicate> disjuncts;
    for (const auto& conj : dnf) {
      std::vector<Predicate> atoms;
      for (const auto& a : conj) atoms.push_back(Predicate::mk_atom(a));
      disjuncts.push_back(Predicate::mk_and(std::move(atoms)));
    }
    return dnf.empty() ? Predicate::mk_false() : Predicate::mk_or(std::move(disjuncts));
  }

  EntryRef flatten_block(const std::vector<Stmt>& stmts, EntryRef exit) {
    EntryRef entry = exit;
    for (auto it = stmts.rbegin(); it != stmts.rend(); ++it) entry = flatten_stmt(*it, entry);
    return entry;
  }

  // Flattens one statement; `next` is where control continues afterwards.
  // Sequence numbers keep transition declaration order textual, so the fall
  // through edge of a while loop is declared after its body entries.
  EntryRef flatten_stmt(const Stmt& s, EntryRef next) {
    auto id = [&] { return identity_update(ts_.nvars()); };
    switch (s.kind) {
      case Stmt::Kind::Skip: {
        LocationId l = fresh_loc(s.label);
        link(l, next, Predicate::mk_true(), id());
        return {{l}};
      }
      case Stmt::Kind::Assign: {
        LocationId l = fresh_loc(s.label);
        auto v = ts_.find_var(s.target);
        if (!v) throw ParseError(0, "unknown assignment target " + s.target);
        std::vector<Polynomial> upd = id();
        upd[*v] = lower_expr(s.expr, ts_);
        link(l, next, Predicate::mk_true(), upd);
        return {{l}};
      }
      case Stmt::Kind::Assert: {
        LocationId l = fresh_loc(s.label);
        ts_.assertions.emplace_back(l, lower_pred(s.pred, ts_));
        link(l, next, Predicate::mk_true(), id());
        return {{l}};
      }
      case Stmt::Kind::Assume: {
        LocationId l = fresh_loc(s.label);
        link(l, next, lower_pred(s.pred, ts_), id());
        return {{l}};
      }
      case Stmt::Kind::IfPred: {
        LocationId l = fresh_loc(s.label);
        Predicate cond = lower_pred(s.pred, ts_);
        int here = seq_++;
        EntryRef then_entry = flatten_block(s.blocks[0], next);
        EntryRef else_entry = s.blocks.size() > 1 ? flatten_block(s.blocks[1], next) : next;
        // Branch edges precede the bodies' own edges textually.
        for (LocationId t : then_entry.targets) order_.emplace_back(here, Transition{l, t, cond, id()});
        Predicate ncond = negation(cond);
        for (LocationId t : else_entry.targets)
          order_.emplace_back(here, Transition{l, t, ncond, id()});
        return {{l}};
      }
      case Stmt::Kind::IfStar: {
        // Unlabeled: pure fork, no location of its own.
        std::vector<EntryRef> entries;
        for (const auto& b : s.blocks) entries.push_back(flatten_block(b, next));
        if (s.label.empty()) {
          EntryRef fork;
          for (const auto& e : entries)
            fork.targets.insert(fork.targets.end(), e.targets.begin(), e.targets.end());
          return fork;
        }
        LocationId l = fresh_loc(s.label);
        for (const auto& e : entries) link(l, e, Predicate::mk_true(), id());
        return {{l}};
      }
      case Stmt::Kind::While: {
        LocationId l = fresh_loc(s.label);
        Predicate cond = lower_pred(s.pred, ts_);
        int here = seq_++;
        EntryRef body_entry = flatten_block(s.blocks[0], {{l}});
        for (LocationId t : body_entry.targets)
          order_.emplace_back(here, Transition{l, t, cond, id()});
        link(l, next, negation(cond), id());
        return {{l}};
      }
    }
    return next;
  }
};

}  // namespace detail

inline TransitionSystem lower_program(const ProgramAst& ast) {
  return detail::Flattener(ast).run();
}

inline TransitionSystem parse_program(const std::string& src) {
  return lower_program(parse_program_ast(src));
}

// ---- pretty-printer (same grammar; parse . print . parse is identity on
// the lowered system) ----

namespace detail {

inline std::string print_expr(const PExpr& e, int prec = 0) {
  switch (e.kind) {
    case PExpr::Kind::Const: {
      std::string s = buchirank::to_string(e.value);
      if (e.value < 0 && prec > 0) return "(" + s + ")";
      return s;
    }
    case PExpr::Kind::Var:
      return e.var;
    case PExpr::Kind::Add:
    case PExpr::Kind::Sub: {
      std::string s = print_expr(e.args[0], 1) + (e.kind == PExpr::Kind::Add ? " + " : " - ") +
                      print_expr(e.args[1], 2);
      return prec > 1 ? "(" + s + ")" : s;
    }
    case PExpr::Kind::Mul: {
      std::string s = print_expr(e.args[0], 2) + "*" + print_expr(e.args[1], 3);
      return prec > 2 ? "(" + s + ")" : s;
    }
    case PExpr::Kind::Neg: {
      std::string s = "-" + print_expr(e.args[0], 3);
      return prec > 2 ? "(" + s + ")" : s;
    }
    case PExpr::Kind::Pow: {
      std::string s = print_expr(e.args[0], 4) + "^" + std::to_string(e.exponent);
      return s;
    }
  }
  return "0";
}

inline std::string print_pred(const PPred& p, int prec = 0) {
  switch (p.kind) {
    case PPred::Kind::True:
      return "true";
    case PPred::Kind::False:
      return "false";
    case PPred::Kind::Cmp: {
      const char* op = p.op == PPred::Op::Geq  ? " >= "
                       : p.op == PPred::Op::Gt ? " > "
                       : p.op == PPred::Op::Leq ? " <= "
                       : p.op == PPred::Op::Lt  ? " < "
                                                 : " == ";
      return print_expr(p.sides[0]) + op + print_expr(p.sides[1]);
    }
    case PPred::Kind::Not:
      return "!(" + print_pred(p.args[0], 0) + ")";
    case PPred::Kind::And: {
      std::string s;
      for (std::size_t i = 0; i < p.args.size(); ++i)
        s += (i ? " && " : "") + print_pred(p.args[i], 2);
      return prec > 1 ? "(" + s + ")" : s;
    }
    case PPred::Kind::Or: {
      std::string s;
      for (std::size_t i = 0; i < p.args.size(); ++i)
        s += (i ? " || " : "") + print_pred(p.args[i], 1);
      return prec > 0 ? "(" + s + ")" : s;
    }
  }
  return "true";
}

inline void print_block(const std::vector<Stmt>& b, int indent, std::ostringstream& os);

inline void print_stmt(const Stmt& s, int indent, std::ostringstream& os) {
  std::string pad(indent * 2, ' ');
  os << pad;
  if (!s.label.empty()) os << s.label << ": ";
  switch (s.kind) {
    case Stmt::Kind::Skip:
      os << "skip\n";
      return;
    case Stmt::Kind::Assign:
      os << s.target << " = " << print_expr(s.expr) << "\n";
      return;
    case Stmt::Kind::Assert:
      os << "assert(" << print_pred(s.pred) << ")\n";
      return;
    case Stmt::Kind::Assume:
      os << "assume(" << print_pred(s.pred) << ")\n";
      return;
    case Stmt::Kind::While:
      os << "while " << print_pred(s.pred) << " do\n";
      print_block(s.blocks[0], indent + 1, os);
      os << pad << "done\n";
      return;
    case Stmt::Kind::IfPred:
      os << "if " << print_pred(s.pred) << " then\n";
      print_block(s.blocks[0], indent + 1, os);
      if (s.blocks.size() > 1) {
        os << pad << "else\n";
        print_block(s.blocks[1], indent + 1, os);
      }
      os << pad << "fi\n";
      return;
    case Stmt::Kind::IfStar:
      os << "if * then\n";
      print_block(s.blocks[0], indent + 1, os);
      for (std::size_t i = 1; i + 1 < s.blocks.size(); ++i) {
        os << pad << "elif * then\n";
        print_block(s.blocks[i], indent + 1, os);
      }
      os << pad << "else\n";
      print_block(s.blocks.back(), indent + 1, os);
      os << pad << "fi\n";
      return;
  }
}

inline void print_block(const std::vector<Stmt>& b, int indent, std::ostringstream& os) {
  for (const auto& s : b) print_stmt(s, indent, os);
}

}  // namespace detail

inline std::string program_to_string(const ProgramAst& ast) {
  std::ostringstream os;
  if (ast.has_pre) os << "pre: " << detail::print_pred(ast.pre) << "\n";
  for (const auto& [lbl, p] : ast.invariants)
    os << "invariant " << lbl << ": " << detail::print_pred(p) << "\n";
  detail::print_block(ast.body, 0, os);
  if (!ast.trailing_label.empty()) os << ast.trailing_label << ":\n";
  return os.str();
}

}  // namespace buchirank
