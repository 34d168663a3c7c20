#pragma once

#include <algorithm>
#include <cassert>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "buchirank/rational.hpp"

namespace buchirank {

// Power product over a fixed variable set; exponents[i] is the power of
// variable i. All monomials of one polynomial share the same length.
struct Monomial {
  std::vector<unsigned> exponents;

  Monomial() = default;
  explicit Monomial(std::size_t nvars) : exponents(nvars, 0) {}
  explicit Monomial(std::vector<unsigned> e) : exponents(std::move(e)) {}

  std::size_t nvars() const { return exponents.size(); }

  unsigned degree() const {
    unsigned d = 0;
    for (unsigned e : exponents) d += e;
    return d;
  }

  bool is_constant() const { return degree() == 0; }

  Monomial operator*(const Monomial& o) const {
    assert(exponents.size() == o.exponents.size());
    Monomial r(*this);
    for (std::size_t i = 0; i < exponents.size(); ++i) r.exponents[i] += o.exponents[i];
    return r;
  }

  bool operator==(const Monomial& o) const { return exponents == o.exponents; }
};

// Graded lexicographic order: lower total degree first, ties broken by the
// exponent vector. The fixed term order used everywhere downstream.
struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    unsigned da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    return a.exponents < b.exponents;
  }
};

inline bool grlex_less(const Monomial& a, const Monomial& b) { return GrlexLess{}(a, b); }

// All monomials in nvars variables of total degree <= d, in graded-lex order.
inline std::vector<Monomial> monomial_basis(std::size_t nvars, unsigned d) {
  std::vector<Monomial> out;
  std::vector<unsigned> cur(nvars, 0);
  // Enumerate by total degree, lexicographic within a degree.
  auto rec = [&](auto&& self, std::size_t idx, unsigned remaining) -> void {
    if (idx == nvars) {
      if (remaining == 0) out.push_back(Monomial(cur));
      return;
    }
    for (unsigned e = 0; e <= remaining; ++e) {
      cur[idx] = e;
      self(self, idx + 1, remaining - e);
    }
    cur[idx] = 0;
  };
  for (unsigned deg = 0; deg <= d; ++deg) rec(rec, 0, deg);
  std::stable_sort(out.begin(), out.end(), GrlexLess{});
  return out;
}

// Multivariate polynomial with exact rational coefficients. The coefficient
// map never stores zeros.
class Polynomial {
 public:
  using Terms = std::map<Monomial, Rational, GrlexLess>;

  Polynomial() : nvars_(0) {}
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, const Rational& c) {
    Polynomial p(nvars);
    if (c != 0) p.terms_[Monomial(nvars)] = c;
    return p;
  }

  static Polynomial variable(std::size_t nvars, std::size_t i) {
    assert(i < nvars);
    Polynomial p(nvars);
    Monomial m(nvars);
    m.exponents[i] = 1;
    p.terms_[m] = rat(1);
    return p;
  }

  static Polynomial term(std::size_t nvars, const Monomial& m, const Rational& c) {
    Polynomial p(nvars);
    if (c != 0) p.terms_[m] = c;
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_constant());
  }

  Rational constant_value() const {
    auto it = terms_.find(Monomial(nvars_));
    return it == terms_.end() ? rat(0) : it->second;
  }

  unsigned degree() const {
    unsigned d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  Rational coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? rat(0) : it->second;
  }

  void add_term(const Monomial& m, const Rational& c) {
    assert(m.nvars() == nvars_);
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      if (c != 0) terms_[m] = c;
      return;
    }
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }

  Polynomial operator-() const {
    Polynomial r(nvars_);
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
  }

  Polynomial& operator+=(const Polynomial& o) {
    assert(nvars_ == o.nvars_);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o) {
    assert(nvars_ == o.nvars_);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    assert(a.nvars_ == b.nvars_);
    Polynomial r(a.nvars_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
    return r;
  }

  friend Polynomial operator*(const Rational& c, const Polynomial& p) {
    Polynomial r(p.nvars_);
    if (c == 0) return r;
    for (const auto& [m, pc] : p.terms_) r.terms_[m] = c * pc;
    return r;
  }

  Polynomial pow(unsigned e) const {
    Polynomial r = constant(nvars_, rat(1));
    for (unsigned i = 0; i < e; ++i) r = r * (*this);
    return r;
  }

  bool operator==(const Polynomial& o) const {
    if (nvars_ != o.nvars_) return false;
    auto it = terms_.begin();
    auto jt = o.terms_.begin();
    for (; it != terms_.end() && jt != o.terms_.end(); ++it, ++jt)
      if (!(it->first == jt->first) || it->second != jt->second) return false;
    return it == terms_.end() && jt == o.terms_.end();
  }
  bool operator!=(const Polynomial& o) const { return !(*this == o); }

  Rational eval(std::span<const Rational> point) const {
    assert(point.size() == nvars_);
    Rational total = 0;
    for (const auto& [m, c] : terms_) {
      Rational t = c;
      for (std::size_t i = 0; i < nvars_; ++i)
        for (unsigned e = 0; e < m.exponents[i]; ++e) t *= point[i];
      total += t;
    }
    return total;
  }

  // Substitutes subs[i] for variable i; the result lives over subs[0].nvars().
  Polynomial substitute(const std::vector<Polynomial>& subs) const {
    assert(subs.size() == nvars_);
    std::size_t out_vars = nvars_ == 0 ? 0 : subs[0].nvars();
    Polynomial r(out_vars);
    for (const auto& [m, c] : terms_) {
      Polynomial t = Polynomial::constant(out_vars, c);
      for (std::size_t i = 0; i < nvars_; ++i)
        if (m.exponents[i] > 0) t = t * subs[i].pow(m.exponents[i]);
      r += t;
    }
    return r;
  }

  // Canonical rendering: terms in graded-lex descending order, integral and
  // fractional coefficients as in "2*x^2 - 1/2*x + 3". Used for AP spellings.
  std::string to_string(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const Monomial& m = it->first;
      Rational c = it->second;
      bool neg = c < 0;
      if (first) {
        if (neg) os << "-";
      } else {
        os << (neg ? " - " : " + ");
      }
      if (neg) c = -c;
      std::string mono;
      for (std::size_t i = 0; i < m.nvars(); ++i) {
        if (m.exponents[i] == 0) continue;
        if (!mono.empty()) mono += "*";
        mono += names.at(i);
        if (m.exponents[i] > 1) mono += "^" + std::to_string(m.exponents[i]);
      }
      if (mono.empty()) {
        os << buchirank::to_string(c);
      } else if (c == 1) {
        os << mono;
      } else {
        os << buchirank::to_string(c) << "*" << mono;
      }
      first = false;
    }
    return os.str();
  }

 private:
  std::size_t nvars_;
  Terms terms_;
};

inline std::vector<Polynomial> identity_update(std::size_t nvars) {
  std::vector<Polynomial> u;
  u.reserve(nvars);
  for (std::size_t i = 0; i < nvars; ++i) u.push_back(Polynomial::variable(nvars, i));
  return u;
}

}  // namespace buchirank
