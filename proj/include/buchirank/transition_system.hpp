#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "buchirank/predicate.hpp"

namespace buchirank {

using LocationId = int;

struct Transition {
  LocationId source = -1;
  LocationId target = -1;
  Predicate guard;                  // default true
  std::vector<Polynomial> update;   // one polynomial per variable
};

// A state is a location plus an exact rational valuation of the variables.
struct State {
  LocationId loc = -1;
  std::vector<Rational> vals;

  bool operator==(const State& o) const { return loc == o.loc && vals == o.vals; }
  bool operator<(const State& o) const {
    if (loc != o.loc) return loc < o.loc;
    return vals < o.vals;
  }
};

// Polynomial transition system with finite non-determinism: named variables,
// named locations, guarded polynomial updates, an initial location with a
// precondition, and (for parsed programs) a terminal location carrying the
// identity self-loop.
struct TransitionSystem {
  std::vector<std::string> var_names;
  std::vector<std::string> location_names;
  LocationId init = -1;
  std::optional<LocationId> terminal;
  Predicate theta_init;                          // precondition over variables
  std::vector<Transition> transitions;           // declaration order
  std::vector<Predicate> invariants;             // per location, default true
  std::vector<std::pair<LocationId, Predicate>> assertions;  // observation points

  std::size_t nvars() const { return var_names.size(); }
  std::size_t nlocs() const { return location_names.size(); }

  LocationId add_location(const std::string& name) {
    location_names.push_back(name);
    invariants.push_back(Predicate::mk_true());
    return static_cast<LocationId>(location_names.size() - 1);
  }

  std::optional<LocationId> find_location(const std::string& name) const {
    for (std::size_t i = 0; i < location_names.size(); ++i)
      if (location_names[i] == name) return static_cast<LocationId>(i);
    // Aliases for the distinguished locations.
    if ((name == "l_term" || name == "l_t") && terminal) return terminal;
    if (name == "l_init") return init;
    return std::nullopt;
  }

  std::optional<std::size_t> find_var(const std::string& name) const {
    for (std::size_t i = 0; i < var_names.size(); ++i)
      if (var_names[i] == name) return i;
    return std::nullopt;
  }

  std::vector<const Transition*> out_transitions(LocationId l) const {
    std::vector<const Transition*> out;
    for (const auto& t : transitions)
      if (t.source == l) out.push_back(&t);
    return out;
  }

  bool is_initial(const State& s) const {
    return s.loc == init && theta_init.eval(s.vals);
  }
};

// Enabled transition-successor pairs of s, in transition declaration order.
inline std::vector<std::pair<const Transition*, State>> successors(
    const TransitionSystem& ts, const State& s) {
  std::vector<std::pair<const Transition*, State>> out;
  for (const auto& t : ts.transitions) {
    if (t.source != s.loc) continue;
    if (!t.guard.eval(s.vals)) continue;
    State next;
    next.loc = t.target;
    next.vals.reserve(ts.nvars());
    for (const auto& p : t.update) next.vals.push_back(p.eval(s.vals));
    out.emplace_back(&t, std::move(next));
  }
  return out;
}

// Makes every location total by adding a fall-through edge to the terminal
// guarded by the negation of the disjunction of existing guards. Skipped when
// that complement is syntactically empty (a guard is literally true, or the
// negated disjunction simplifies to false after contradiction pruning).
inline TransitionSystem complete_totality(TransitionSystem ts) {
  if (!ts.terminal) {
    LocationId t = ts.add_location("l_t");
    ts.terminal = t;
    ts.transitions.push_back({t, t, Predicate::mk_true(), identity_update(ts.nvars())});
  }
  std::vector<Transition> added;
  for (LocationId l = 0; l < static_cast<LocationId>(ts.nlocs()); ++l) {
    std::vector<Predicate> guards;
    for (const auto& t : ts.transitions)
      if (t.source == l) guards.push_back(t.guard);
    if (l == *ts.terminal && !guards.empty()) continue;
    bool has_true = false;
    for (const auto& g : guards)
      if (g.is_true()) has_true = true;
    if (has_true) continue;
    Predicate complement =
        guards.empty() ? Predicate::mk_true() : Predicate::mk_not(Predicate::mk_or(guards));
    auto dnf = to_dnf(complement);
    if (dnf.empty()) continue;  // complement unsatisfiable syntactically
    std::vector<Predicate> disjuncts;
    for (const auto& conj : dnf) {
      std::vector<Predicate> atoms;
      for (const auto& a : conj) atoms.push_back(Predicate::mk_atom(a));
      disjuncts.push_back(Predicate::mk_and(std::move(atoms)));
    }
    added.push_back({l, *ts.terminal, Predicate::mk_or(std::move(disjuncts)),
                     identity_update(ts.nvars())});
  }
  for (auto& t : added) ts.transitions.push_back(std::move(t));
  return ts;
}

}  // namespace buchirank
