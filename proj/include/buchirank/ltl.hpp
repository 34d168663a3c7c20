#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "buchirank/program.hpp"
#include "buchirank/transition_system.hpp"

namespace buchirank {

// Atomic propositions: at(location) or a polynomial constraint over the
// program variables.
struct AtomicProp {
  enum class Kind { AtLoc, Constraint };
  Kind kind = Kind::AtLoc;
  LocationId loc = -1;
  Atom atom;

  static AtomicProp at(LocationId l) {
    AtomicProp p;
    p.kind = Kind::AtLoc;
    p.loc = l;
    return p;
  }
  static AtomicProp constraint(Atom a) {
    AtomicProp p;
    p.kind = Kind::Constraint;
    p.atom = std::move(a);
    return p;
  }

  bool operator==(const AtomicProp& o) const {
    if (kind != o.kind) return false;
    return kind == Kind::AtLoc ? loc == o.loc : atom == o.atom;
  }

  bool holds(const State& s) const {
    return kind == Kind::AtLoc ? s.loc == loc : atom.eval(s.vals);
  }

  std::string to_string(const TransitionSystem& ts) const {
    if (kind == Kind::AtLoc) return "at(" + ts.location_names.at(loc) + ")";
    return atom.to_string(ts.var_names);
  }
};

// LTL over AtomicProps. Release is internal (produced by negation normal
// form), never written in the surface syntax.
struct LtlFormula {
  enum class Kind { True, False, Ap, Not, And, Or, Next, Until, Release, Globally, Finally };
  Kind kind = Kind::True;
  AtomicProp ap;
  std::vector<std::shared_ptr<LtlFormula>> args;

  static std::shared_ptr<LtlFormula> make(Kind k, std::vector<std::shared_ptr<LtlFormula>> a = {}) {
    auto f = std::make_shared<LtlFormula>();
    f->kind = k;
    f->args = std::move(a);
    return f;
  }
  static std::shared_ptr<LtlFormula> atom(AtomicProp p) {
    auto f = std::make_shared<LtlFormula>();
    f->kind = Kind::Ap;
    f->ap = std::move(p);
    return f;
  }

  std::string to_string(const TransitionSystem& ts) const {
    auto wrap = [&](const LtlFormula& f) {
      std::string s = f.to_string(ts);
      bool atomic = f.kind == Kind::Ap || f.kind == Kind::True || f.kind == Kind::False;
      return atomic ? s : "(" + s + ")";
    };
    switch (kind) {
      case Kind::True:
        return "true";
      case Kind::False:
        return "false";
      case Kind::Ap:
        return ap.to_string(ts);
      case Kind::Not:
        return "!" + wrap(*args[0]);
      case Kind::And:
        return wrap(*args[0]) + " && " + wrap(*args[1]);
      case Kind::Or:
        return wrap(*args[0]) + " || " + wrap(*args[1]);
      case Kind::Next:
        return "X " + wrap(*args[0]);
      case Kind::Until:
        return wrap(*args[0]) + " U " + wrap(*args[1]);
      case Kind::Release:
        return wrap(*args[0]) + " R " + wrap(*args[1]);
      case Kind::Globally:
        return "G " + wrap(*args[0]);
      case Kind::Finally:
        return "F " + wrap(*args[0]);
    }
    return "true";
  }
};

using LtlPtr = std::shared_ptr<LtlFormula>;

// ---- parser ----
// Grammar: unary (! X G F) > U/R (right assoc) > && > || > =>. at(name) and
// polynomial comparisons are the atoms. ==  desugars to a conjunction.

namespace ltl_detail {

class LtlParser {
 public:
  LtlParser(const std::string& src, const TransitionSystem& ts)
      : toks_(detail::tokenize(src)), ts_(ts) {}

  LtlPtr parse() {
    LtlPtr f = parse_impl();
    if (cur().kind != detail::Token::Kind::End)
      throw ParseError(cur().line, "unexpected trailing input '" + cur().text + "'");
    return f;
  }

 private:
  std::vector<detail::Token> toks_;
  std::size_t pos_ = 0;
  const TransitionSystem& ts_;

  const detail::Token& cur() const { return toks_[pos_]; }
  const detail::Token& next() { return toks_[pos_++]; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(cur().line, msg); }
  bool peek_op(const std::string& s, std::size_t ahead = 0) const {
    const detail::Token& t = toks_[pos_ + ahead];
    return t.kind == detail::Token::Kind::Op && t.text == s;
  }
  bool peek_ident(const std::string& s) const {
    return cur().kind == detail::Token::Kind::Ident && cur().text == s;
  }

  LtlPtr parse_impl() {
    LtlPtr lhs = parse_or();
    if (peek_op("=>") || peek_op("->")) {
      next();
      LtlPtr rhs = parse_impl();
      return LtlFormula::make(LtlFormula::Kind::Or,
                              {LtlFormula::make(LtlFormula::Kind::Not, {lhs}), rhs});
    }
    return lhs;
  }

  LtlPtr parse_or() {
    LtlPtr lhs = parse_and();
    while (peek_op("||")) {
      next();
      lhs = LtlFormula::make(LtlFormula::Kind::Or, {lhs, parse_and()});
    }
    return lhs;
  }

  LtlPtr parse_and() {
    LtlPtr lhs = parse_until();
    while (peek_op("&&")) {
      next();
      lhs = LtlFormula::make(LtlFormula::Kind::And, {lhs, parse_until()});
    }
    return lhs;
  }

  LtlPtr parse_until() {
    LtlPtr lhs = parse_unary();
    if (peek_ident("U") || peek_ident("R")) {
      auto k = cur().text == "U" ? LtlFormula::Kind::Until : LtlFormula::Kind::Release;
      next();
      return LtlFormula::make(k, {lhs, parse_until()});
    }
    return lhs;
  }

  LtlPtr parse_unary() {
    if (peek_op("!")) {
      next();
      return LtlFormula::make(LtlFormula::Kind::Not, {parse_unary()});
    }
    if (peek_ident("X") || peek_ident("G") || peek_ident("F")) {
      std::string op = next().text;
      LtlPtr arg = parse_unary();
      auto k = op == "X"   ? LtlFormula::Kind::Next
               : op == "G" ? LtlFormula::Kind::Globally
                           : LtlFormula::Kind::Finally;
      return LtlFormula::make(k, {arg});
    }
    if (peek_ident("true")) {
      next();
      return LtlFormula::make(LtlFormula::Kind::True);
    }
    if (peek_ident("false")) {
      next();
      return LtlFormula::make(LtlFormula::Kind::False);
    }
    if (peek_ident("at") && peek_op("(", 1)) {
      next();
      next();
      std::string name;
      while (!peek_op(")")) {
        if (cur().kind == detail::Token::Kind::End) fail("unterminated at(");
        name += next().text;
      }
      next();
      auto loc = ts_.find_location(name);
      if (!loc) fail("at() references unknown location " + name);
      return LtlFormula::atom(AtomicProp::at(*loc));
    }
    if (peek_op("(")) {
      // Parenthesized formula, or a parenthesized arithmetic expression that
      // opens a comparison; mirror the predicate parser's backtracking.
      std::size_t save = pos_;
      next();
      try {
        LtlPtr f = parse_impl();
        if (!peek_op(")")) fail("expected ')'");
        next();
        if (peek_cmp()) {
          pos_ = save;
          return parse_constraint();
        }
        return f;
      } catch (const ParseError&) {
        pos_ = save;
        return parse_constraint();
      }
    }
    return parse_constraint();
  }

  bool peek_cmp() const {
    if (cur().kind != detail::Token::Kind::Op) return false;
    const std::string& t = cur().text;
    return t == ">=" || t == ">" || t == "<=" || t == "<" || t == "==";
  }

  // Comparisons become constraint APs after normalizing to >= / > 0 form.
  LtlPtr parse_constraint() {
    PPred cmp = parse_cmp_ast();
    Predicate lowered = detail::lower_pred(cmp, ts_);
    if (lowered.kind == Predicate::Kind::Atom)
      return LtlFormula::atom(AtomicProp::constraint(lowered.atom));
    // == produced a conjunction of two atoms.
    std::vector<LtlPtr> parts;
    for (const auto& c : lowered.children)
      parts.push_back(LtlFormula::atom(AtomicProp::constraint(c.atom)));
    LtlPtr out = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i)
      out = LtlFormula::make(LtlFormula::Kind::And, {out, parts[i]});
    return out;
  }

  PPred parse_cmp_ast() {
    PPred p;
    p.kind = PPred::Kind::Cmp;
    p.sides.push_back(parse_expr_ast());
    if (!peek_cmp()) fail("expected comparison operator, found '" + cur().text + "'");
    std::string op = next().text;
    p.sides.push_back(parse_expr_ast());
    p.op = op == ">="   ? PPred::Op::Geq
           : op == ">"  ? PPred::Op::Gt
           : op == "<=" ? PPred::Op::Leq
           : op == "<"  ? PPred::Op::Lt
                        : PPred::Op::Eq;
    return p;
  }

  PExpr parse_expr_ast() {
    PExpr lhs = parse_term_ast();
    while (peek_op("+") || peek_op("-")) {
      bool add = next().text == "+";
      PExpr out;
      out.kind = add ? PExpr::Kind::Add : PExpr::Kind::Sub;
      out.args.push_back(std::move(lhs));
      out.args.push_back(parse_term_ast());
      lhs = std::move(out);
    }
    return lhs;
  }
  PExpr parse_term_ast() {
    PExpr lhs = parse_factor_ast();
    while (peek_op("*")) {
      next();
      PExpr out;
      out.kind = PExpr::Kind::Mul;
      out.args.push_back(std::move(lhs));
      out.args.push_back(parse_factor_ast());
      lhs = std::move(out);
    }
    return lhs;
  }
  PExpr parse_factor_ast() {
    if (peek_op("-")) {
      next();
      PExpr out;
      out.kind = PExpr::Kind::Neg;
      out.args.push_back(parse_factor_ast());
      return out;
    }
    PExpr base = parse_atom_ast();
    if (peek_op("^")) {
      next();
      if (cur().kind != detail::Token::Kind::Number) fail("expected integer exponent");
      PExpr out;
      out.kind = PExpr::Kind::Pow;
      out.exponent = static_cast<unsigned>(std::stoul(next().text));
      out.args.push_back(std::move(base));
      return out;
    }
    return base;
  }
  PExpr parse_atom_ast() {
    if (peek_op("(")) {
      next();
      PExpr e = parse_expr_ast();
      if (!peek_op(")")) fail("expected ')'");
      next();
      return e;
    }
    if (cur().kind == detail::Token::Kind::Number) {
      std::string num = next().text;
      if (peek_op("/")) {
        next();
        if (cur().kind != detail::Token::Kind::Number) fail("expected denominator");
        num += "/" + next().text;
      }
      PExpr e;
      e.kind = PExpr::Kind::Const;
      e.value = parse_rational(num);
      return e;
    }
    if (cur().kind == detail::Token::Kind::Ident && !detail::is_keyword(cur().text) &&
        cur().text != "U" && cur().text != "R" && cur().text != "X" && cur().text != "G" &&
        cur().text != "F") {
      if (!ts_.find_var(cur().text)) fail("unknown variable " + cur().text);
      PExpr e;
      e.kind = PExpr::Kind::Var;
      e.var = next().text;
      return e;
    }
    fail("expected expression, found '" + cur().text + "'");
  }
};

}  // namespace ltl_detail

inline LtlPtr parse_ltl(const std::string& src, const TransitionSystem& ts) {
  return ltl_detail::LtlParser(src, ts).parse();
}

// Negation normal form of !f (or of f when negate=false): negations pushed to
// atoms, with Until/Release dualized and G/F expanded through.
inline LtlPtr negate_nnf(const LtlPtr& f, bool negate = true) {
  using K = LtlFormula::Kind;
  switch (f->kind) {
    case K::True:
      return LtlFormula::make(negate ? K::False : K::True);
    case K::False:
      return LtlFormula::make(negate ? K::True : K::False);
    case K::Ap:
      return negate ? LtlFormula::make(K::Not, {LtlFormula::atom(f->ap)}) : LtlFormula::atom(f->ap);
    case K::Not: {
      const LtlPtr& inner = f->args[0];
      if (!negate && inner->kind == K::Ap) return f;  // literal, already NNF
      return negate_nnf(inner, !negate);
    }
    case K::And:
    case K::Or: {
      K k = f->kind;
      if (negate) k = (k == K::And) ? K::Or : K::And;
      return LtlFormula::make(k, {negate_nnf(f->args[0], negate), negate_nnf(f->args[1], negate)});
    }
    case K::Next:
      return LtlFormula::make(K::Next, {negate_nnf(f->args[0], negate)});
    case K::Until:
    case K::Release: {
      K k = f->kind;
      if (negate) k = (k == K::Until) ? K::Release : K::Until;
      return LtlFormula::make(k, {negate_nnf(f->args[0], negate), negate_nnf(f->args[1], negate)});
    }
    case K::Globally:
      // G a == false R a; !G a == true U !a.
      return negate ? LtlFormula::make(K::Until, {LtlFormula::make(K::True),
                                                  negate_nnf(f->args[0], true)})
                    : LtlFormula::make(K::Release, {LtlFormula::make(K::False),
                                                    negate_nnf(f->args[0], false)});
    case K::Finally:
      return negate ? LtlFormula::make(K::Release, {LtlFormula::make(K::False),
                                                    negate_nnf(f->args[0], true)})
                    : LtlFormula::make(K::Until, {LtlFormula::make(K::True),
                                                  negate_nnf(f->args[0], false)});
  }
  return f;
}

inline LtlPtr to_nnf(const LtlPtr& f) { return negate_nnf(f, false); }

// Collects distinct atomic propositions in first-occurrence order.
inline void collect_aps(const LtlPtr& f, std::vector<AtomicProp>& out) {
  if (f->kind == LtlFormula::Kind::Ap) {
    for (const auto& p : out)
      if (p == f->ap) return;
    out.push_back(f->ap);
    return;
  }
  for (const auto& a : f->args) collect_aps(a, out);
}

// An ultimately periodic run: stem s_0..s_{m-1}, then cycle c_0..c_{k-1}
// repeated forever. cycle must be nonempty.
struct Lasso {
  std::vector<State> stem;
  std::vector<State> cycle;

  std::size_t positions() const { return stem.size() + cycle.size(); }
  const State& at(std::size_t i) const {
    return i < stem.size() ? stem[i] : cycle[i - stem.size()];
  }
  std::size_t next(std::size_t i) const {
    return i + 1 < positions() ? i + 1 : stem.size();
  }
};

// Exact LTL evaluation on a lasso by least/greatest fixpoint iteration over
// the finitely many positions.
inline bool eval_trace(const LtlPtr& f, const Lasso& lasso) {
  using K = LtlFormula::Kind;
  std::size_t n = lasso.positions();
  if (lasso.cycle.empty()) throw std::invalid_argument("lasso cycle must be nonempty");

  std::vector<char> result(n);
  auto eval_rec = [&](auto&& self, const LtlFormula& g) -> std::vector<char> {
    std::vector<char> out(n, 0);
    switch (g.kind) {
      case K::True:
        std::fill(out.begin(), out.end(), 1);
        return out;
      case K::False:
        return out;
      case K::Ap:
        for (std::size_t i = 0; i < n; ++i) out[i] = g.ap.holds(lasso.at(i));
        return out;
      case K::Not: {
        auto a = self(self, *g.args[0]);
        for (std::size_t i = 0; i < n; ++i) out[i] = !a[i];
        return out;
      }
      case K::And:
      case K::Or: {
        auto a = self(self, *g.args[0]);
        auto b = self(self, *g.args[1]);
        for (std::size_t i = 0; i < n; ++i)
          out[i] = g.kind == K::And ? (a[i] && b[i]) : (a[i] || b[i]);
        return out;
      }
      case K::Next: {
        auto a = self(self, *g.args[0]);
        for (std::size_t i = 0; i < n; ++i) out[i] = a[lasso.next(i)];
        return out;
      }
      case K::Until:
      case K::Finally: {
        std::vector<char> a(n, 1), b;
        if (g.kind == K::Until) a = self(self, *g.args[0]);
        b = self(self, *g.args[g.args.size() - 1]);
        // least fixpoint of out = b || (a && X out)
        std::vector<char> cur(n, 0);
        for (std::size_t round = 0; round <= n; ++round) {
          bool changed = false;
          for (std::size_t i = n; i-- > 0;) {
            char v = b[i] || (a[i] && cur[lasso.next(i)]);
            if (v != cur[i]) {
              cur[i] = v;
              changed = true;
            }
          }
          if (!changed) break;
        }
        return cur;
      }
      case K::Release:
      case K::Globally: {
        std::vector<char> a(n, 0), b;
        if (g.kind == K::Release) a = self(self, *g.args[0]);
        b = self(self, *g.args[g.args.size() - 1]);
        // greatest fixpoint of out = b && (a || X out)
        std::vector<char> cur(n, 1);
        for (std::size_t round = 0; round <= n; ++round) {
          bool changed = false;
          for (std::size_t i = n; i-- > 0;) {
            char v = b[i] && (a[i] || cur[lasso.next(i)]);
            if (v != cur[i]) {
              cur[i] = v;
              changed = true;
            }
          }
          if (!changed) break;
        }
        return cur;
      }
    }
    return out;
  };
  result = eval_rec(eval_rec, *f);
  return result[0];
}

}  // namespace buchirank
