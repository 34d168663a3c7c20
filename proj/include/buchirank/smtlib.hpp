#pragma once

#include <sstream>
#include <string>

#include "buchirank/positivstellensatz.hpp"

namespace buchirank {

inline std::string smt_rational(const Rational& r) {
  Rational a = r < 0 ? Rational(-r) : r;
  std::string body = is_integer(a)
                         ? a.get_num().get_str()
                         : "(/ " + a.get_num().get_str() + " " + a.get_den().get_str() + ")";
  return r < 0 ? "(- " + body + ")" : body;
}

inline std::string smt_term(const CoeffExpr& e, const CoeffPool& pool) {
  if (e.terms.empty()) return "0";
  std::ostringstream os;
  bool sum = e.terms.size() > 1;
  if (sum) os << "(+";
  for (const auto& [mono, coeff] : e.terms) {
    std::string factors;
    int nfactors = 0;
    for (const auto& [var, exp] : mono)
      for (unsigned k = 0; k < exp; ++k) {
        factors += " " + pool.names[var];
        ++nfactors;
      }
    if (coeff != 1 || nfactors == 0) {
      factors = " " + smt_rational(coeff) + factors;
      ++nfactors;
    }
    if (sum) os << " ";
    if (nfactors > 1)
      os << "(*" << factors << ")";
    else
      os << factors.substr(1);
  }
  if (sum) os << ")";
  return os.str();
}

inline std::string emit_smtlib(const QpSystem& qp, const CoeffPool& pool) {
  std::ostringstream os;
  os << "(set-logic QF_NRA)\n";
  for (const auto& name : pool.names) os << "(declare-const " << name << " Real)\n";
  for (const auto& c : qp.constraints) {
    if (!c.note.empty()) os << "; " << c.note << "\n";
    const char* op = c.rel == CRel::Eq ? "=" : c.rel == CRel::Geq ? ">=" : ">";
    os << "(assert (" << op << " " << smt_term(c.expr, pool) << " 0))\n";
  }
  os << "(check-sat)\n(get-model)\n";
  return os.str();
}

}  // namespace buchirank
