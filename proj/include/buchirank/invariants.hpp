#pragma once

#include <string>
#include <vector>

#include "buchirank/witness.hpp"

namespace buchirank {

// Per-location invariant templates synthesized jointly with the ranking
// functions. Each location gets a conjunction of `width` polynomial atoms
// i_{l,k}(x) >= 0. The returned entailments pin them down: initiation (the
// precondition entails the initial invariant) and consecution (each enabled
// transition preserves the full conjunction, on top of any annotated
// invariant). Passing `templates` as the invs argument of the constraint
// generators then adds every atom to every ranking premise.
struct InvariantSynthesis {
  std::vector<TemplateSet> templates;  // one set per atom index
  std::vector<EntailmentConstraint> constraints;
};

inline InvariantSynthesis cosynthesize_invariants(
    const ProductSystem& prod, int degree, CoeffPool& pool, int width = 1,
    const Rational& eps = default_entailment_margin()) {
  using namespace witness_detail;
  InvariantSynthesis s;
  for (int k = 0; k < width; ++k)
    s.templates.push_back(fix_templates(prod, degree, pool, "i" + std::to_string(k) + "_"));

  for (const auto& branch : to_dnf(prod.sys.theta_init)) {
    for (int k = 0; k < width; ++k) {
      std::vector<SymCond> premises;
      for (const auto& a : branch) premises.push_back(cond_of_atom(a));
      emit(premises, SymCond{s.templates[k].at(prod.sys.init), false, true, {}}, eps,
           "invariant initiation at " + prod.sys.location_names[prod.sys.init] + " atom " +
               std::to_string(k),
           s.constraints);
    }
  }

  for (const auto& t : prod.sys.transitions) {
    for (const auto& inv_branch : to_dnf(prod.sys.invariants[t.source])) {
      for (const auto& guard_branch : to_dnf(t.guard)) {
        for (int k = 0; k < width; ++k) {
          std::vector<SymCond> premises;
          for (const auto& a : inv_branch) premises.push_back(cond_of_atom(a));
          for (int j = 0; j < width; ++j)
            premises.push_back(SymCond{s.templates[j].at(t.source), false, true, {}});
          for (const auto& a : guard_branch) premises.push_back(cond_of_atom(a));
          emit(premises,
               SymCond{s.templates[k].at(t.target).substitute(t.update), false, true, {}}, eps,
               "invariant consecution " + prod.sys.location_names[t.source] + "->" +
                   prod.sys.location_names[t.target] + " atom " + std::to_string(k),
               s.constraints);
        }
      }
    }
  }
  return s;
}

// Concrete invariant atoms from a solved coefficient assignment: for each
// location, the list of polynomials whose nonnegativity conjunction is the
// synthesized invariant.
inline std::vector<std::vector<Polynomial>> reconstruct_invariants(
    const InvariantSynthesis& s, const ProductSystem& prod, const std::vector<Rational>& vals) {
  std::vector<std::vector<Polynomial>> out(prod.sys.nlocs());
  for (std::size_t loc = 0; loc < prod.sys.nlocs(); ++loc)
    for (const auto& ts : s.templates)
      out[loc].push_back(ts.at(static_cast<int>(loc)).instantiate(vals));
  return out;
}

// Conjoins the synthesized atoms onto the per-location invariants of a copy
// of the product. The ranking conditions were generated under these premises,
// so the witness checker has to see the same state filter.
inline ProductSystem with_invariants(const ProductSystem& prod,
                                     const std::vector<std::vector<Polynomial>>& atoms) {
  ProductSystem out = prod;
  for (std::size_t loc = 0; loc < out.sys.nlocs() && loc < atoms.size(); ++loc) {
    std::vector<Predicate> cs;
    cs.push_back(out.sys.invariants[loc]);
    for (const auto& p : atoms[loc]) cs.push_back(Predicate::mk_atom(Atom::geq(p)));
    out.sys.invariants[loc] = Predicate::mk_and(std::move(cs));
  }
  return out;
}

// Samples the inductiveness of concrete invariant atoms on the integer grid
// [lo,hi]^n: initiation (every precondition state satisfies the atoms at the
// initial location) and consecution (every enabled transition from a state
// inside the invariant lands inside the target invariant). Successor states
// may leave the grid; they are still evaluated exactly.
inline WitnessCheck validate_invariants(const ProductSystem& prod,
                                        const std::vector<std::vector<Polynomial>>& atoms,
                                        long lo, long hi) {
  WitnessCheck rep;
  auto holds = [&](LocationId loc, const std::vector<Rational>& vals) {
    for (const auto& p : atoms[loc])
      if (p.eval(vals) < 0) return false;
    return true;
  };
  for (const State& s : box_states(prod, lo, hi)) {
    if (s.loc == prod.sys.init && prod.sys.theta_init.eval(s.vals)) {
      ++rep.checked;
      if (!holds(s.loc, s.vals))
        rep.fail("initiation fails at " + witness_detail::describe(prod, s));
    }
    if (!prod.sys.invariants[s.loc].eval(s.vals) || !holds(s.loc, s.vals)) continue;
    ++rep.checked;
    for (const auto& [t, nxt] : successors(prod.sys, s))
      if (!holds(nxt.loc, nxt.vals))
        rep.fail("consecution fails on " + witness_detail::describe(prod, s) + " -> " +
                 witness_detail::describe(prod, nxt));
  }
  return rep;
}

}  // namespace buchirank
