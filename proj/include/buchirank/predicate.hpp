#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "buchirank/polynomial.hpp"

namespace buchirank {

// rel >= : poly >= 0 (closed); rel > : poly > 0 (strict, internal only --
// stages that need closed constraints apply the epsilon rewrite themselves).
struct Atom {
  enum class Rel { Geq, Gt };
  Polynomial poly;
  Rel rel = Rel::Geq;

  Atom() = default;
  Atom(Polynomial p, Rel r) : poly(std::move(p)), rel(r) {}

  static Atom geq(Polynomial p) { return Atom(std::move(p), Rel::Geq); }
  static Atom gt(Polynomial p) { return Atom(std::move(p), Rel::Gt); }

  bool eval(std::span<const Rational> point) const {
    Rational v = poly.eval(point);
    return rel == Rel::Geq ? v >= 0 : v > 0;
  }

  // not(p >= 0) == -p > 0; not(p > 0) == -p >= 0.
  Atom complement() const {
    return Atom(-poly, rel == Rel::Geq ? Rel::Gt : Rel::Geq);
  }

  bool operator==(const Atom& o) const { return rel == o.rel && poly == o.poly; }

  std::string to_string(const std::vector<std::string>& names) const {
    return poly.to_string(names) + (rel == Rel::Geq ? " >= 0" : " > 0");
  }
};

// Quantifier-free boolean combination of atoms.
struct Predicate {
  enum class Kind { True, False, Atom, Not, And, Or };
  Kind kind = Kind::True;
  buchirank::Atom atom;                        // Kind::Atom
  std::vector<Predicate> children;             // Not (1), And/Or (>=1)

  static Predicate mk_true() { return Predicate{}; }
  static Predicate mk_false() {
    Predicate p;
    p.kind = Kind::False;
    return p;
  }
  static Predicate mk_atom(buchirank::Atom a) {
    Predicate p;
    p.kind = Kind::Atom;
    p.atom = std::move(a);
    return p;
  }
  static Predicate mk_not(Predicate c) {
    Predicate p;
    p.kind = Kind::Not;
    p.children.push_back(std::move(c));
    return p;
  }
  static Predicate mk_and(std::vector<Predicate> cs) {
    if (cs.empty()) return mk_true();
    if (cs.size() == 1) return std::move(cs[0]);
    Predicate p;
    p.kind = Kind::And;
    p.children = std::move(cs);
    return p;
  }
  static Predicate mk_or(std::vector<Predicate> cs) {
    if (cs.empty()) return mk_false();
    if (cs.size() == 1) return std::move(cs[0]);
    Predicate p;
    p.kind = Kind::Or;
    p.children = std::move(cs);
    return p;
  }
  static Predicate mk_and(Predicate a, Predicate b) {
    std::vector<Predicate> cs;
    cs.push_back(std::move(a));
    cs.push_back(std::move(b));
    return mk_and(std::move(cs));
  }
  static Predicate mk_or(Predicate a, Predicate b) {
    std::vector<Predicate> cs;
    cs.push_back(std::move(a));
    cs.push_back(std::move(b));
    return mk_or(std::move(cs));
  }

  bool is_true() const { return kind == Kind::True; }
  bool is_false() const { return kind == Kind::False; }

  bool eval(std::span<const Rational> point) const {
    switch (kind) {
      case Kind::True:
        return true;
      case Kind::False:
        return false;
      case Kind::Atom:
        return atom.eval(point);
      case Kind::Not:
        return !children[0].eval(point);
      case Kind::And:
        for (const auto& c : children)
          if (!c.eval(point)) return false;
        return true;
      case Kind::Or:
        for (const auto& c : children)
          if (c.eval(point)) return true;
        return false;
    }
    return false;
  }

  // Negation normal form; all Not nodes are eliminated by complementing atoms.
  Predicate nnf(bool negate = false) const {
    switch (kind) {
      case Kind::True:
        return negate ? mk_false() : mk_true();
      case Kind::False:
        return negate ? mk_true() : mk_false();
      case Kind::Atom:
        return mk_atom(negate ? atom.complement() : atom);
      case Kind::Not:
        return children[0].nnf(!negate);
      case Kind::And:
      case Kind::Or: {
        std::vector<Predicate> cs;
        cs.reserve(children.size());
        for (const auto& c : children) cs.push_back(c.nnf(negate));
        bool and_out = (kind == Kind::And) != negate;
        return and_out ? mk_and(std::move(cs)) : mk_or(std::move(cs));
      }
    }
    return mk_true();
  }

  bool operator==(const Predicate& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::Atom) return atom == o.atom;
    if (children.size() != o.children.size()) return false;
    for (std::size_t i = 0; i < children.size(); ++i)
      if (!(children[i] == o.children[i])) return false;
    return true;
  }

  std::string to_string(const std::vector<std::string>& names) const {
    switch (kind) {
      case Kind::True:
        return "true";
      case Kind::False:
        return "false";
      case Kind::Atom:
        return atom.to_string(names);
      case Kind::Not:
        return "!(" + children[0].to_string(names) + ")";
      case Kind::And:
      case Kind::Or: {
        std::string sep = kind == Kind::And ? " && " : " || ";
        std::string out;
        for (std::size_t i = 0; i < children.size(); ++i) {
          if (i) out += sep;
          bool paren = children[i].kind == Kind::And || children[i].kind == Kind::Or;
          out += paren ? "(" + children[i].to_string(names) + ")" : children[i].to_string(names);
        }
        return out;
      }
    }
    return "true";
  }
};

// One conjunct of a DNF: a list of atoms (empty list = true).
using AtomConjunction = std::vector<Atom>;

// Detects a conjunction containing both p(x) and its complement; such a
// disjunct is unsatisfiable and can be dropped syntactically.
inline bool conjunction_contradicts(const AtomConjunction& atoms) {
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    // A strict atom with a nonpositive-constant polynomial is plain false.
    if (atoms[i].poly.is_constant()) {
      Rational c = atoms[i].poly.constant_value();
      if (atoms[i].rel == Atom::Rel::Geq ? c < 0 : c <= 0) return true;
    }
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      if (atoms[i].poly == -atoms[j].poly &&
          !(atoms[i].rel == Atom::Rel::Geq && atoms[j].rel == Atom::Rel::Geq))
        return true;
    }
  }
  return false;
}

// DNF of the NNF form of p, with syntactically contradictory disjuncts
// removed. Result: disjunction of atom conjunctions; {} = false, {{}} = true.
inline std::vector<AtomConjunction> to_dnf(const Predicate& pred) {
  Predicate p = pred.nnf();
  std::vector<AtomConjunction> out;
  switch (p.kind) {
    case Predicate::Kind::True:
      out.push_back({});
      return out;
    case Predicate::Kind::False:
      return out;
    case Predicate::Kind::Atom:
      out.push_back({p.atom});
      return out;
    case Predicate::Kind::Or: {
      for (const auto& c : p.children)
        for (auto& d : to_dnf(c)) out.push_back(std::move(d));
      break;
    }
    case Predicate::Kind::And: {
      out.push_back({});
      for (const auto& c : p.children) {
        std::vector<AtomConjunction> next;
        for (const auto& partial : out)
          for (const auto& d : to_dnf(c)) {
            AtomConjunction merged = partial;
            merged.insert(merged.end(), d.begin(), d.end());
            next.push_back(std::move(merged));
          }
        out = std::move(next);
      }
      break;
    }
    case Predicate::Kind::Not:
      // nnf() removed Not nodes.
      break;
  }
  std::vector<AtomConjunction> kept;
  for (auto& d : out)
    if (!conjunction_contradicts(d)) kept.push_back(std::move(d));
  return kept;
}

}  // namespace buchirank
