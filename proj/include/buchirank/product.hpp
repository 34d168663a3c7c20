#pragma once

#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "buchirank/buchi.hpp"
#include "buchirank/transition_system.hpp"

namespace buchirank {

// Product of a transition system with a Büchi automaton. The product is
// itself a transition system whose locations are reachable (location, state)
// pairs; buchi marks the pairs whose automaton component is accepting.
struct ProductSystem {
  TransitionSystem sys;
  std::vector<std::pair<LocationId, int>> components;
  std::vector<bool> buchi;

  int find(LocationId l, int q) const {
    for (std::size_t i = 0; i < components.size(); ++i)
      if (components[i] == std::make_pair(l, q)) return static_cast<int>(i);
    return -1;
  }
};

namespace product_detail {

// The automaton reads the letter of the source state: at() propositions are
// decided by the source location; constraint propositions become guard atoms
// (negative occurrences as strict complements).
struct CubeSplit {
  bool at_consistent = true;
  std::vector<Atom> constraints;
};

inline CubeSplit split_cube(const LabelCube& cube, const std::vector<AtomicProp>& aps,
                            LocationId source) {
  CubeSplit out;
  for (std::size_t i = 0; i < aps.size(); ++i) {
    bool pos = (cube.pos >> i) & 1;
    bool neg = (cube.neg >> i) & 1;
    if (!pos && !neg) continue;
    if (aps[i].kind == AtomicProp::Kind::AtLoc) {
      bool here = aps[i].loc == source;
      if (pos != here) {
        out.at_consistent = false;
        return out;
      }
    } else {
      out.constraints.push_back(pos ? aps[i].atom : aps[i].atom.complement());
    }
  }
  return out;
}

}  // namespace product_detail

// Builds the reachable product. The input system should be total (apply
// complete_totality first); the automaton is completed with a rejecting sink
// here, so the product of a total system is total.
inline ProductSystem build_product(const TransitionSystem& ts, const Nbw& automaton) {
  Nbw aut = automaton;
  complete_with_sink(aut, ts);

  ProductSystem prod;
  prod.sys.var_names = ts.var_names;
  prod.sys.theta_init = ts.theta_init;

  std::map<std::pair<LocationId, int>, int> ids;
  std::vector<std::pair<LocationId, int>> queue;
  auto intern = [&](LocationId l, int q) {
    auto key = std::make_pair(l, q);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    std::string name =
        "(" + ts.location_names.at(l) + "," + aut.state_names.at(q) + ")";
    int id = prod.sys.add_location(name);
    prod.sys.invariants[id] = ts.invariants.at(l);
    prod.components.push_back(key);
    prod.buchi.push_back(aut.accepting.at(q));
    ids[key] = id;
    queue.push_back(key);
    return id;
  };

  prod.sys.init = intern(ts.init, aut.start);

  for (std::size_t head = 0; head < queue.size(); ++head) {
    auto [l, q] = queue[head];
    int source = ids[{l, q}];
    for (const auto& t : ts.transitions) {
      if (t.source != l) continue;
      for (const auto& e : aut.out[q]) {
        for (const auto& cube : e.label) {
          auto split = product_detail::split_cube(cube, aut.aps, l);
          if (!split.at_consistent) continue;
          Predicate guard = t.guard;
          for (const auto& atom : split.constraints)
            guard = Predicate::mk_and(guard, Predicate::mk_atom(atom));
          if (to_dnf(guard).empty()) continue;  // syntactically contradictory
          int target = intern(t.target, e.target);
          prod.sys.transitions.push_back({source, target, std::move(guard), t.update});
        }
      }
    }
  }
  return prod;
}

// Projects a run of the product back onto the program component.
inline State project_state(const ProductSystem& prod, const State& s) {
  return State{prod.components.at(s.loc).first, s.vals};
}

inline std::string to_dot(const ProductSystem& prod) {
  std::ostringstream os;
  os << "digraph product {\n";
  for (std::size_t i = 0; i < prod.sys.nlocs(); ++i) {
    os << "  n" << i << " [label=\"" << prod.sys.location_names[i] << "\""
       << (prod.buchi[i] ? ", peripheries=2" : "") << "];\n";
  }
  os << "  init [shape=point];\n  init -> n" << prod.sys.init << ";\n";
  for (const auto& t : prod.sys.transitions) {
    os << "  n" << t.source << " -> n" << t.target << " [label=\""
       << t.guard.to_string(prod.sys.var_names) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace buchirank
