#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "buchirank/witness.hpp"

namespace buchirank {

enum class SosMode { Diagonal, Squares };

enum class CRel { Eq, Geq, Gt };

struct CoeffConstraint {
  CoeffExpr expr;
  CRel rel = CRel::Geq;
  std::string note;
};

// Conjunction of polynomial constraints over the pool unknowns; quadratic in
// the unknowns for everything the entailment encoder produces.
struct QpSystem {
  std::vector<CoeffConstraint> constraints;
};

namespace psatz_detail {

// Nonnegative-by-construction multiplier: a free coefficient on each even
// monomial up to degree 2*dh, every coefficient constrained >= 0.
inline SymbolicPolynomial diagonal_multiplier(std::size_t nvars, int dh,
                                              const std::string& prefix, CoeffPool& pool,
                                              QpSystem& qp) {
  SymbolicPolynomial sigma(nvars);
  auto half = monomial_basis(nvars, dh);
  for (std::size_t j = 0; j < half.size(); ++j) {
    int id = pool.add(prefix + "_" + std::to_string(j));
    qp.constraints.push_back(
        {CoeffExpr::var(id), CRel::Geq, pool.names[id] + " >= 0"});
    sigma.add_term(half[j] * half[j], CoeffExpr::var(id));
  }
  return sigma;
}

// Sum of two squares of free polynomial templates of degree dh.
inline SymbolicPolynomial squares_multiplier(std::size_t nvars, int dh,
                                             const std::string& prefix, CoeffPool& pool) {
  SymbolicPolynomial sigma(nvars);
  auto basis = monomial_basis(nvars, dh);
  for (int s = 0; s < 2; ++s) {
    SymbolicPolynomial h(nvars);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      int id = pool.add(prefix + "_" + std::to_string(s) + "_" + std::to_string(j));
      h.add_term(basis[j], CoeffExpr::var(id));
    }
    sigma = sigma + h * h;
  }
  return sigma;
}

inline std::string monomial_key(const Monomial& m) {
  std::string key;
  for (std::size_t i = 0; i < m.exponents.size(); ++i)
    key += (i ? "," : "") + std::to_string(m.exponents[i]);
  return key;
}

}  // namespace psatz_detail

inline int auto_multiplier_degree(const EntailmentConstraint& e) {
  unsigned deg0 = e.rhs.degree();
  unsigned maxg = 0;
  for (const auto& g : e.lhs) maxg = std::max(maxg, g.degree());
  if (deg0 <= maxg) return 1;
  return std::max(1u, (deg0 - maxg + 1) / 2);
}

// Writes the conclusion as sigma_0 + sum_i sigma_i * g_i with nonnegative
// multipliers and matches coefficients monomial by monomial. Multipliers are
// created in order: sigma_0 first, then one per premise in premise order.
// dh < 0 picks the degree automatically. In Squares mode, premises carrying
// template coefficients still get diagonal multipliers so the system stays
// quadratic in the unknowns.
inline void putinar_encode(const EntailmentConstraint& e, SosMode mode, int dh,
                           CoeffPool& pool, QpSystem& qp, int entailment_id) {
  using namespace psatz_detail;
  std::size_t nvars = e.rhs.nvars;
  if (nvars == 0)
    for (const auto& g : e.lhs) nvars = std::max(nvars, g.nvars);
  if (dh < 0) dh = auto_multiplier_degree(e);

  unsigned deg0 = e.rhs.degree();
  unsigned best = 2 * static_cast<unsigned>(dh);
  for (const auto& g : e.lhs)
    best = std::max(best, 2 * static_cast<unsigned>(dh) + g.degree());
  if (best < deg0) {
    std::ostringstream os;
    os << "multiplier degree " << dh << " cannot reach the conclusion degree " << deg0
       << " in entailment " << entailment_id;
    throw std::runtime_error(os.str());
  }

  std::string base = "l" + std::to_string(entailment_id);
  SymbolicPolynomial acc;
  if (mode == SosMode::Squares) {
    acc = squares_multiplier(nvars, dh, "u" + std::to_string(entailment_id) + "_0", pool);
  } else {
    acc = diagonal_multiplier(nvars, dh, base + "_0", pool, qp);
  }
  for (std::size_t i = 0; i < e.lhs.size(); ++i) {
    const SymbolicPolynomial& g = e.lhs[i];
    std::string prefix = base + "_" + std::to_string(i + 1);
    SymbolicPolynomial sigma;
    if (mode == SosMode::Squares && g.coeff_degree() == 0) {
      sigma = squares_multiplier(
          nvars, dh, "u" + std::to_string(entailment_id) + "_" + std::to_string(i + 1),
          pool);
    } else {
      sigma = diagonal_multiplier(nvars, dh, prefix, pool, qp);
    }
    acc = acc + sigma * g;
  }
  SymbolicPolynomial diff = acc - e.rhs;
  for (const auto& [m, ce] : diff.terms) {
    std::ostringstream note;
    note << "e" << entailment_id << " [" << e.note << "] monomial " << monomial_key(m);
    qp.constraints.push_back({ce, CRel::Eq, note.str()});
  }
}

inline void encode_ground(const std::vector<GroundConstraint>& grounds, QpSystem& qp) {
  for (const auto& g : grounds)
    qp.constraints.push_back({g.expr, g.strict ? CRel::Gt : CRel::Geq, g.note});
}

inline QpSystem encode_qp(const std::vector<EntailmentConstraint>& entailments,
                          const std::vector<GroundConstraint>& grounds, SosMode mode,
                          int dh, CoeffPool& pool) {
  QpSystem qp;
  for (std::size_t i = 0; i < entailments.size(); ++i)
    putinar_encode(entailments[i], mode, dh, pool, qp, static_cast<int>(i));
  encode_ground(grounds, qp);
  return qp;
}

}  // namespace buchirank
