#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "buchirank/product.hpp"
#include "buchirank/symbolic.hpp"

namespace buchirank {

// One symbolic polynomial per product location: f_l = sum of c * m over the
// monomial basis of the chosen degree.
struct TemplateSet {
  int degree = 1;
  std::vector<Monomial> basis;
  std::vector<std::vector<int>> coeff_ids;  // [location][basis index]

  SymbolicPolynomial at(int loc) const {
    SymbolicPolynomial f(basis.empty() ? 0 : basis[0].nvars());
    for (std::size_t j = 0; j < basis.size(); ++j)
      f.add_term(basis[j], CoeffExpr::var(coeff_ids.at(loc).at(j)));
    return f;
  }
};

inline TemplateSet fix_templates(const ProductSystem& prod, int degree, CoeffPool& pool,
                                 const std::string& prefix = "c") {
  TemplateSet t;
  t.degree = degree;
  t.basis = monomial_basis(prod.sys.nvars(), degree);
  t.coeff_ids.resize(prod.sys.nlocs());
  for (std::size_t l = 0; l < prod.sys.nlocs(); ++l)
    for (std::size_t j = 0; j < t.basis.size(); ++j)
      t.coeff_ids[l].push_back(
          pool.add(prefix + std::to_string(l) + "_" + std::to_string(j)));
  return t;
}

// Premises and conclusion are polynomials required nonnegative; strict atoms
// have already been shifted by the epsilon margin on both sides.
struct EntailmentConstraint {
  std::vector<SymbolicPolynomial> lhs;
  SymbolicPolynomial rhs;
  std::string note;
};

// Ground polynomial constraint over pool unknowns (initial-state variables).
struct GroundConstraint {
  CoeffExpr expr;
  bool strict = false;
  std::string note;
};

namespace witness_detail {

struct SymCond {
  SymbolicPolynomial p;
  bool strict = false;
  bool from_template = false;  // carries template coefficients
  Atom concrete;               // meaningful only when !from_template
};

inline SymCond cond_of_atom(const Atom& a) {
  return SymCond{SymbolicPolynomial::from(a.poly), a.rel == Atom::Rel::Gt, false, a};
}

inline SymCond complement(const SymCond& c) {
  SymCond out;
  out.p = CoeffExpr::constant(-1) * c.p;
  out.strict = !c.strict;
  out.from_template = c.from_template;
  if (!c.from_template)
    out.concrete = c.concrete.complement();
  return out;
}

inline SymbolicPolynomial shifted(const SymCond& c, const Rational& eps) {
  if (!c.strict) return c.p;
  SymbolicPolynomial p = c.p;
  p.add_term(Monomial(p.nvars), CoeffExpr::constant(-eps));
  return p;
}

// One disjunct of the ranked-successor condition: the guard atoms of a
// transition branch followed by the rank conjuncts for its target.
struct RankDisjunct {
  std::vector<SymCond> conds;
  std::string note;
};

inline std::vector<RankDisjunct> rank_disjuncts(const ProductSystem& prod,
                                                const TemplateSet& templates, int loc) {
  std::vector<RankDisjunct> out;
  SymbolicPolynomial f_l = templates.at(loc);
  for (std::size_t ti = 0; ti < prod.sys.transitions.size(); ++ti) {
    const Transition& t = prod.sys.transitions[ti];
    if (t.source != loc) continue;
    SymbolicPolynomial f_next = templates.at(t.target).substitute(t.update);
    for (const auto& branch : to_dnf(t.guard)) {
      RankDisjunct d;
      for (const auto& a : branch) d.conds.push_back(cond_of_atom(a));
      d.conds.push_back(SymCond{f_next, false, true, {}});
      if (!prod.buchi[loc]) {
        SymbolicPolynomial neg1(f_l.nvars);
        neg1.add_term(Monomial(f_l.nvars), CoeffExpr::constant(-1));
        d.conds.push_back(SymCond{f_l + neg1 - f_next, false, true, {}});
      }
      d.note = prod.sys.location_names[loc] + "->" + prod.sys.location_names[t.target];
      out.push_back(std::move(d));
    }
  }
  return out;
}

inline bool concrete_premises_contradict(const std::vector<SymCond>& premises) {
  AtomConjunction atoms;
  for (const auto& c : premises)
    if (!c.from_template) atoms.push_back(c.concrete);
  return conjunction_contradicts(atoms);
}

inline void emit(const std::vector<SymCond>& premises, const SymCond& conclusion,
                 const Rational& eps, const std::string& note,
                 std::vector<EntailmentConstraint>& out) {
  if (concrete_premises_contradict(premises)) return;
  EntailmentConstraint e;
  for (const auto& c : premises) e.lhs.push_back(shifted(c, eps));
  e.rhs = shifted(conclusion, eps);
  e.note = note;
  out.push_back(std::move(e));
}

inline std::vector<std::vector<SymCond>> phi_branches(
    const ProductSystem& prod, const TemplateSet& templates, int loc,
    const std::vector<TemplateSet>* invs = nullptr) {
  std::vector<std::vector<SymCond>> out;
  SymCond f_nonneg{templates.at(loc), false, true, {}};
  for (const auto& branch : to_dnf(prod.sys.invariants[loc])) {
    std::vector<SymCond> prem;
    for (const auto& a : branch) prem.push_back(cond_of_atom(a));
    if (invs)
      for (const auto& ts : *invs) prem.push_back(SymCond{ts.at(loc), false, true, {}});
    prem.push_back(f_nonneg);
    out.push_back(std::move(prem));
  }
  return out;
}

}  // namespace witness_detail

inline Rational default_entailment_margin() { return Rational(1) / 1000; }

// Existential condition at every location: under the invariant and f_l >= 0,
// when the first k-1 ranked-successor disjuncts all fail, the last one holds.
// Expanded into plain entailments by choosing one failing conjunct per
// negated disjunct and one conclusion conjunct of the last disjunct.
inline std::vector<EntailmentConstraint> gen_ebrf_constraints(
    const ProductSystem& prod, const TemplateSet& templates,
    const Rational& eps = default_entailment_margin(),
    const std::vector<TemplateSet>* invs = nullptr) {
  using namespace witness_detail;
  std::vector<EntailmentConstraint> out;
  for (int loc = 0; loc < static_cast<int>(prod.sys.nlocs()); ++loc) {
    auto disjuncts = rank_disjuncts(prod, templates, loc);
    if (disjuncts.empty())
      throw std::runtime_error("existential ranking needs an outgoing transition at " +
                               prod.sys.location_names[loc]);
    std::size_t k = disjuncts.size();
    for (const auto& phi : phi_branches(prod, templates, loc, invs)) {
      std::vector<std::size_t> choice(k - 1, 0);
      while (true) {
        std::vector<SymCond> premises = phi;
        for (std::size_t i = 0; i + 1 < k; ++i)
          premises.push_back(complement(disjuncts[i].conds[choice[i]]));
        if (!concrete_premises_contradict(premises)) {
          const auto& last = disjuncts[k - 1];
          for (std::size_t j = 0; j < last.conds.size(); ++j) {
            std::ostringstream note;
            note << prod.sys.location_names[loc] << " chooses " << last.note
                 << " conjunct " << j;
            if (k > 1) {
              note << " given failures";
              for (std::size_t i = 0; i + 1 < k; ++i) note << " " << choice[i];
            }
            emit(premises, last.conds[j], eps, note.str(), out);
          }
        }
        std::size_t pos = 0;
        for (; pos + 1 < k; ++pos) {
          if (++choice[pos] < disjuncts[pos].conds.size()) break;
          choice[pos] = 0;
        }
        if (pos + 1 >= k) break;
      }
      if (out.size() > 200000)
        throw std::runtime_error("entailment expansion is too large");
    }
  }
  return out;
}

// Universal condition: every enabled transition is ranked.
inline std::vector<EntailmentConstraint> gen_ubrf_constraints(
    const ProductSystem& prod, const TemplateSet& templates,
    const Rational& eps = default_entailment_margin(),
    const std::vector<TemplateSet>* invs = nullptr) {
  using namespace witness_detail;
  std::vector<EntailmentConstraint> out;
  for (int loc = 0; loc < static_cast<int>(prod.sys.nlocs()); ++loc) {
    auto disjuncts = rank_disjuncts(prod, templates, loc);
    for (const auto& phi : phi_branches(prod, templates, loc, invs)) {
      for (const auto& d : disjuncts) {
        std::vector<SymCond> premises = phi;
        std::size_t n_guard = 0;
        for (const auto& c : d.conds)
          if (!c.from_template) ++n_guard;
        for (std::size_t j = 0; j < n_guard; ++j) premises.push_back(d.conds[j]);
        for (std::size_t j = n_guard; j < d.conds.size(); ++j) {
          emit(premises, d.conds[j], eps,
               d.note + " ranked, conjunct " + std::to_string(j - n_guard), out);
        }
      }
    }
  }
  return out;
}

// Universal initial condition: theta_init entails f >= 0 at the start.
inline std::vector<EntailmentConstraint> gen_ubrf_init(
    const ProductSystem& prod, const TemplateSet& templates,
    const Rational& eps = default_entailment_margin()) {
  using namespace witness_detail;
  std::vector<EntailmentConstraint> out;
  SymCond goal{templates.at(prod.sys.init), false, true, {}};
  for (const auto& branch : to_dnf(prod.sys.theta_init)) {
    std::vector<SymCond> premises;
    for (const auto& a : branch) premises.push_back(cond_of_atom(a));
    emit(premises, goal, eps, "initial states have f >= 0", out);
  }
  return out;
}

inline std::size_t count_init_branches(const ProductSystem& prod) {
  return to_dnf(prod.sys.theta_init).size();
}

inline std::vector<int> add_init_vars(const ProductSystem& prod, CoeffPool& pool) {
  std::vector<int> t_ids;
  for (std::size_t j = 0; j < prod.sys.nvars(); ++j)
    t_ids.push_back(pool.add("t" + std::to_string(j)));
  return t_ids;
}

// Existential initial condition, one disjunct of theta_init at a time: the
// fresh unknowns t name a concrete initial valuation with f(t) >= 0.
inline std::vector<GroundConstraint> gen_ebrf_init(const ProductSystem& prod,
                                                   const TemplateSet& templates,
                                                   const std::vector<int>& t_ids,
                                                   std::size_t branch) {
  auto dnf = to_dnf(prod.sys.theta_init);
  if (dnf.empty()) throw std::runtime_error("initial condition is unsatisfiable");
  if (branch >= dnf.size()) throw std::out_of_range("no such initial branch");
  std::vector<GroundConstraint> out;
  for (const auto& a : dnf[branch]) {
    GroundConstraint g;
    g.expr = SymbolicPolynomial::from(a.poly).ground(t_ids);
    g.strict = a.rel == Atom::Rel::Gt;
    g.note = "initial valuation satisfies " + a.to_string(prod.sys.var_names);
    out.push_back(std::move(g));
  }
  out.push_back(GroundConstraint{templates.at(prod.sys.init).ground(t_ids), false,
                                 "initial valuation has f >= 0"});
  return out;
}

// A fully solved witness: either one polynomial per product location or a
// finite value table (as produced by the explicit-state oracle).
struct ConcreteWitness {
  bool universal = false;
  int degree = 0;
  std::vector<Polynomial> f;  // per location; empty means tabular
  std::map<State, Rational> table;
  std::optional<std::vector<Rational>> init_vals;

  bool tabular() const { return f.empty(); }

  std::optional<Rational> value(const State& s) const {
    if (!tabular()) return f.at(s.loc).eval(s.vals);
    auto it = table.find(s);
    if (it == table.end()) return std::nullopt;
    return it->second;
  }
};

struct WitnessCheck {
  bool ok = true;
  std::size_t checked = 0;
  std::vector<std::string> violations;

  void fail(const std::string& why) {
    ok = false;
    if (violations.size() < 20) violations.push_back(why);
  }
};

namespace witness_detail {

inline std::string describe(const ProductSystem& prod, const State& s) {
  std::ostringstream os;
  os << prod.sys.location_names[s.loc] << " [";
  for (std::size_t i = 0; i < s.vals.size(); ++i)
    os << (i ? "," : "") << to_string(s.vals[i]);
  os << "]";
  return os.str();
}

}  // namespace witness_detail

// Exact semantics of the ranking conditions on the given states: strict
// decrease by at least one outside the Büchi set, plain nonnegativity
// preservation inside it, existential or universal over successors.
inline WitnessCheck check_witness(const ProductSystem& prod, const ConcreteWitness& w,
                                  const std::vector<State>& states) {
  WitnessCheck rep;
  auto val = [&](const State& s) { return w.value(s); };
  for (const State& s : states) {
    if (!prod.sys.invariants[s.loc].eval(s.vals)) continue;
    auto v = val(s);
    if (!v || *v < 0) continue;
    ++rep.checked;
    auto succ = successors(prod.sys, s);
    bool source_buchi = prod.buchi[s.loc];
    auto ranked = [&](const State& nxt) {
      auto nv = val(nxt);
      if (!nv || *nv < 0) return false;
      if (!source_buchi && !(*nv <= *v - 1)) return false;
      return true;
    };
    if (w.universal) {
      for (const auto& [t, nxt] : succ)
        if (!ranked(nxt))
          rep.fail("unranked edge from " + witness_detail::describe(prod, s) + " to " +
                   witness_detail::describe(prod, nxt));
    } else {
      bool any = false;
      for (const auto& [t, nxt] : succ)
        if (ranked(nxt)) any = true;
      if (!any)
        rep.fail("no ranked successor at " + witness_detail::describe(prod, s));
    }
  }
  // Initial condition.
  if (w.universal) {
    for (const State& s : states) {
      if (s.loc != prod.sys.init || !prod.sys.theta_init.eval(s.vals)) continue;
      auto v = val(s);
      if (!v || *v < 0)
        rep.fail("initial state " + witness_detail::describe(prod, s) + " has f < 0");
    }
  } else if (w.init_vals) {
    State s0{prod.sys.init, *w.init_vals};
    if (!prod.sys.theta_init.eval(s0.vals))
      rep.fail("claimed initial valuation violates the precondition");
    else {
      auto v = val(s0);
      if (!v || *v < 0) rep.fail("claimed initial valuation has f < 0");
    }
  } else {
    bool any = false;
    if (w.tabular()) {
      for (const auto& [s, v] : w.table)
        if (s.loc == prod.sys.init && prod.sys.theta_init.eval(s.vals) && v >= 0) any = true;
    } else {
      for (const State& s : states) {
        if (s.loc != prod.sys.init || !prod.sys.theta_init.eval(s.vals)) continue;
        auto v = val(s);
        if (v && *v >= 0) any = true;
      }
    }
    if (!any) rep.fail("no initial state with f >= 0");
  }
  return rep;
}

// Integer grid [lo,hi]^n at every product location.
inline std::vector<State> box_states(const ProductSystem& prod, long lo, long hi) {
  std::vector<State> out;
  std::size_t n = prod.sys.nvars();
  std::vector<long> point(n, lo);
  while (true) {
    for (int l = 0; l < static_cast<int>(prod.sys.nlocs()); ++l) {
      State s;
      s.loc = l;
      for (long x : point) s.vals.push_back(rat(x));
      out.push_back(std::move(s));
    }
    std::size_t j = 0;
    for (; j < n; ++j) {
      if (++point[j] <= hi) break;
      point[j] = lo;
    }
    if (j == n) break;
    if (out.size() > 2000000) throw std::runtime_error("state box is too large");
  }
  return out;
}

// ---- JSON serialization ----------------------------------------------------

inline nlohmann::json witness_to_json(const ProductSystem& prod, const ConcreteWitness& w) {
  nlohmann::json j;
  j["kind"] = w.tabular() ? "tabular" : "polynomial";
  j["universal"] = w.universal;
  if (!w.tabular()) {
    j["degree"] = w.degree;
    nlohmann::json f = nlohmann::json::object();
    for (std::size_t l = 0; l < w.f.size(); ++l) {
      nlohmann::json coeffs = nlohmann::json::object();
      for (const auto& [m, c] : w.f[l].terms()) {
        std::string key;
        for (std::size_t i = 0; i < m.exponents.size(); ++i)
          key += (i ? "," : "") + std::to_string(m.exponents[i]);
        coeffs[key] = to_string(c);
      }
      f[prod.sys.location_names[l]] = coeffs;
    }
    j["f"] = f;
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [s, v] : w.table) {
      nlohmann::json row;
      row["loc"] = prod.sys.location_names[s.loc];
      nlohmann::json vals = nlohmann::json::array();
      for (const auto& x : s.vals) vals.push_back(to_string(x));
      row["vals"] = vals;
      row["value"] = to_string(v);
      rows.push_back(row);
    }
    j["table"] = rows;
  }
  if (w.init_vals) {
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& x : *w.init_vals) vals.push_back(to_string(x));
    j["init_valuation"] = vals;
  }
  return j;
}

inline ConcreteWitness witness_from_json(const ProductSystem& prod, const nlohmann::json& j) {
  ConcreteWitness w;
  w.universal = j.at("universal").get<bool>();
  std::size_t n = prod.sys.nvars();
  auto find_loc = [&](const std::string& name) {
    for (std::size_t l = 0; l < prod.sys.nlocs(); ++l)
      if (prod.sys.location_names[l] == name) return static_cast<int>(l);
    throw std::runtime_error("witness mentions unknown location " + name);
  };
  if (j.at("kind") == "polynomial") {
    w.degree = j.at("degree").get<int>();
    w.f.assign(prod.sys.nlocs(), Polynomial(n));
    for (const auto& [name, coeffs] : j.at("f").items()) {
      int l = find_loc(name);
      for (const auto& [key, val] : coeffs.items()) {
        std::vector<unsigned> exps;
        std::stringstream ss(key);
        std::string part;
        while (std::getline(ss, part, ',')) exps.push_back(std::stoul(part));
        if (exps.size() != n) throw std::runtime_error("bad monomial key " + key);
        w.f[l].add_term(Monomial(exps), parse_rational(val.get<std::string>()));
      }
    }
  } else {
    for (const auto& row : j.at("table")) {
      State s;
      s.loc = find_loc(row.at("loc").get<std::string>());
      for (const auto& v : row.at("vals")) s.vals.push_back(parse_rational(v.get<std::string>()));
      if (s.vals.size() != n) throw std::runtime_error("bad table valuation size");
      w.table[s] = parse_rational(row.at("value").get<std::string>());
    }
  }
  if (j.contains("init_valuation")) {
    std::vector<Rational> vals;
    for (const auto& v : j.at("init_valuation")) vals.push_back(parse_rational(v.get<std::string>()));
    w.init_vals = vals;
  }
  return w;
}

}  // namespace buchirank
