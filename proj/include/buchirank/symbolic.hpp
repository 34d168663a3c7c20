#pragma once

#include <algorithm>
#include <cassert>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "buchirank/polynomial.hpp"

namespace buchirank {

// Registry of solver unknowns (template coefficients, certificate multipliers,
// initial-state variables). Ids are dense and stable in creation order.
struct CoeffPool {
  std::vector<std::string> names;

  int add(const std::string& name) {
    names.push_back(name);
    return static_cast<int>(names.size()) - 1;
  }

  std::optional<int> find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return std::nullopt;
  }

  std::size_t size() const { return names.size(); }
};

// Sparse monomial over pool ids: sorted (id, exponent>0) pairs.
using CMono = std::vector<std::pair<int, unsigned>>;

inline CMono cmono_mul(const CMono& a, const CMono& b) {
  CMono r;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      r.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      r.push_back(b[j++]);
    } else {
      r.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i, ++j;
    }
  }
  return r;
}

inline unsigned cmono_degree(const CMono& m) {
  unsigned d = 0;
  for (const auto& [id, e] : m) d += e;
  return d;
}

// Polynomial in the pool unknowns with rational coefficients.
struct CoeffExpr {
  std::map<CMono, Rational> terms;

  static CoeffExpr constant(const Rational& c) {
    CoeffExpr e;
    if (c != 0) e.terms[{}] = c;
    return e;
  }

  static CoeffExpr var(int id) {
    CoeffExpr e;
    e.terms[{{id, 1}}] = 1;
    return e;
  }

  bool is_zero() const { return terms.empty(); }

  bool is_constant() const {
    return terms.empty() || (terms.size() == 1 && terms.begin()->first.empty());
  }

  Rational constant_value() const {
    auto it = terms.find({});
    return it == terms.end() ? Rational(0) : it->second;
  }

  unsigned degree() const {
    unsigned d = 0;
    for (const auto& [m, c] : terms) d = std::max(d, cmono_degree(m));
    return d;
  }

  void add_term(const CMono& m, const Rational& c) {
    if (c == 0) return;
    auto [it, fresh] = terms.emplace(m, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  }

  friend CoeffExpr operator+(const CoeffExpr& a, const CoeffExpr& b) {
    CoeffExpr r = a;
    for (const auto& [m, c] : b.terms) r.add_term(m, c);
    return r;
  }

  friend CoeffExpr operator-(const CoeffExpr& a, const CoeffExpr& b) {
    CoeffExpr r = a;
    for (const auto& [m, c] : b.terms) r.add_term(m, -c);
    return r;
  }

  friend CoeffExpr operator*(const CoeffExpr& a, const CoeffExpr& b) {
    CoeffExpr r;
    for (const auto& [ma, ca] : a.terms)
      for (const auto& [mb, cb] : b.terms) r.add_term(cmono_mul(ma, mb), ca * cb);
    return r;
  }

  friend CoeffExpr operator*(const Rational& c, const CoeffExpr& e) {
    CoeffExpr r;
    for (const auto& [m, v] : e.terms) r.add_term(m, c * v);
    return r;
  }

  bool operator==(const CoeffExpr& o) const { return terms == o.terms; }

  // Full assignment, indexed by pool id.
  Rational eval(const std::vector<Rational>& vals) const {
    Rational acc = 0;
    for (const auto& [m, c] : terms) {
      Rational t = c;
      for (const auto& [id, e] : m)
        for (unsigned k = 0; k < e; ++k) t *= vals.at(id);
      acc += t;
    }
    return acc;
  }

  std::string to_string(const CoeffPool& pool) const {
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms) {
      Rational a = c;
      if (first) {
        if (a < 0) {
          os << "-";
          a = -a;
        }
      } else {
        os << (a < 0 ? " - " : " + ");
        if (a < 0) a = -a;
      }
      first = false;
      bool unit = (a == 1) && !m.empty();
      if (!unit) os << to_string_rat(a);
      bool lead = unit;
      for (const auto& [id, e] : m) {
        if (!lead) os << "*";
        lead = false;
        os << pool.names.at(id);
        if (e > 1) os << "^" << e;
      }
    }
    return os.str();
  }

 private:
  static std::string to_string_rat(const Rational& r) { return buchirank::to_string(r); }
};

// Polynomial in the program variables whose coefficients are CoeffExprs.
struct SymbolicPolynomial {
  std::size_t nvars = 0;
  std::map<Monomial, CoeffExpr, GrlexLess> terms;

  SymbolicPolynomial() = default;
  explicit SymbolicPolynomial(std::size_t n) : nvars(n) {}

  static SymbolicPolynomial from(const Polynomial& p) {
    SymbolicPolynomial s(p.nvars());
    for (const auto& [m, c] : p.terms()) s.terms.emplace(m, CoeffExpr::constant(c));
    return s;
  }

  bool is_zero() const { return terms.empty(); }

  unsigned degree() const {
    unsigned d = 0;
    for (const auto& [m, c] : terms) d = std::max(d, m.degree());
    return d;
  }

  unsigned coeff_degree() const {
    unsigned d = 0;
    for (const auto& [m, c] : terms) d = std::max(d, c.degree());
    return d;
  }

  void add_term(const Monomial& m, const CoeffExpr& c) {
    assert(m.exponents.size() == nvars);
    if (c.is_zero()) return;
    auto [it, fresh] = terms.emplace(m, c);
    if (!fresh) {
      it->second = it->second + c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  CoeffExpr coeff(const Monomial& m) const {
    auto it = terms.find(m);
    return it == terms.end() ? CoeffExpr{} : it->second;
  }

  friend SymbolicPolynomial operator+(const SymbolicPolynomial& a, const SymbolicPolynomial& b) {
    assert(a.nvars == b.nvars || a.is_zero() || b.is_zero());
    SymbolicPolynomial r = a.is_zero() ? SymbolicPolynomial(b.nvars) : a;
    if (r.nvars == 0) r.nvars = b.nvars;
    for (const auto& [m, c] : b.terms) r.add_term(m, c);
    return r;
  }

  friend SymbolicPolynomial operator-(const SymbolicPolynomial& a, const SymbolicPolynomial& b) {
    SymbolicPolynomial neg = CoeffExpr::constant(-1) * b;
    return a + neg;
  }

  friend SymbolicPolynomial operator*(const SymbolicPolynomial& a, const SymbolicPolynomial& b) {
    assert(a.nvars == b.nvars);
    SymbolicPolynomial r(a.nvars);
    for (const auto& [ma, ca] : a.terms)
      for (const auto& [mb, cb] : b.terms) r.add_term(ma * mb, ca * cb);
    return r;
  }

  friend SymbolicPolynomial operator*(const CoeffExpr& c, const SymbolicPolynomial& p) {
    SymbolicPolynomial r(p.nvars);
    for (const auto& [m, v] : p.terms) r.add_term(m, c * v);
    return r;
  }

  bool operator==(const SymbolicPolynomial& o) const {
    return terms == o.terms;
  }

  // Applies a simultaneous update x := U(x) of the program variables.
  SymbolicPolynomial substitute(const std::vector<Polynomial>& update) const {
    assert(update.size() == nvars);
    SymbolicPolynomial r(nvars);
    for (const auto& [m, ce] : terms) {
      Polynomial expanded = Polynomial::constant(nvars, 1);
      for (std::size_t j = 0; j < nvars; ++j)
        for (unsigned k = 0; k < m.exponents[j]; ++k) expanded = expanded * update[j];
      for (const auto& [em, ec] : expanded.terms()) r.add_term(em, ec * ce);
    }
    return r;
  }

  // Resolves the coefficient unknowns against a full assignment.
  Polynomial instantiate(const std::vector<Rational>& vals) const {
    Polynomial p(nvars);
    for (const auto& [m, ce] : terms) p.add_term(m, ce.eval(vals));
    return p;
  }

  // Replaces every program variable x_j by the pool unknown t_ids[j],
  // producing a ground expression over the pool.
  CoeffExpr ground(const std::vector<int>& t_ids) const {
    assert(t_ids.size() == nvars);
    CoeffExpr out;
    for (const auto& [m, ce] : terms) {
      CMono tm;
      for (std::size_t j = 0; j < nvars; ++j)
        if (m.exponents[j] > 0) tm.emplace_back(t_ids[j], m.exponents[j]);
      std::sort(tm.begin(), tm.end());
      for (const auto& [cm, c] : ce.terms) out.add_term(cmono_mul(cm, tm), c);
    }
    return out;
  }

  std::string to_string(const std::vector<std::string>& var_names,
                        const CoeffPool& pool) const {
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, ce] : terms) {
      if (!first) os << " + ";
      first = false;
      os << "(" << ce.to_string(pool) << ")";
      for (std::size_t j = 0; j < nvars; ++j) {
        if (m.exponents[j] == 0) continue;
        os << "*" << var_names.at(j);
        if (m.exponents[j] > 1) os << "^" << m.exponents[j];
      }
    }
    return os.str();
  }
};

}  // namespace buchirank
