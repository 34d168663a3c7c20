#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "buchirank/ltl.hpp"

namespace buchirank {

// Edge labels are DNFs of cubes over atomic-proposition indices. An empty
// DNF is false; a cube with empty masks is true. At most kMaxAps
// propositions, so valuations fit a machine word.
inline constexpr std::size_t kMaxAps = 12;

struct LabelCube {
  std::uint32_t pos = 0;
  std::uint32_t neg = 0;

  bool matches(std::uint32_t val) const { return (val & pos) == pos && (val & neg) == 0; }
  bool operator==(const LabelCube& o) const { return pos == o.pos && neg == o.neg; }
  bool operator<(const LabelCube& o) const {
    return pos != o.pos ? pos < o.pos : neg < o.neg;
  }
};

using LabelDnf = std::vector<LabelCube>;

inline bool dnf_matches(const LabelDnf& dnf, std::uint32_t val) {
  for (const auto& c : dnf)
    if (c.matches(val)) return true;
  return false;
}

// State-based nondeterministic Büchi automaton over AtomicProps.
struct Nbw {
  std::vector<AtomicProp> aps;
  int start = 0;
  std::vector<std::string> state_names;
  std::vector<bool> accepting;

  struct Edge {
    int target = 0;
    LabelDnf label;
  };
  std::vector<std::vector<Edge>> out;

  std::size_t nstates() const { return out.size(); }

  int add_state(const std::string& name, bool acc) {
    state_names.push_back(name);
    accepting.push_back(acc);
    out.emplace_back();
    return static_cast<int>(out.size() - 1);
  }

  int find_ap(const AtomicProp& p) const {
    for (std::size_t i = 0; i < aps.size(); ++i)
      if (aps[i] == p) return static_cast<int>(i);
    return -1;
  }
};

// Truth values of the automaton's propositions in a concrete program state.
inline std::uint32_t ap_valuation(const std::vector<AtomicProp>& aps, const State& s) {
  std::uint32_t val = 0;
  for (std::size_t i = 0; i < aps.size(); ++i)
    if (aps[i].holds(s)) val |= 1u << i;
  return val;
}

// ---- acceptance of an ultimately periodic word ----

// Does the automaton accept the word of AP valuations induced by the lasso?
// Product of positions and states; accepting iff a reachable nontrivial
// strongly connected component contains an accepting automaton state.
inline bool accepts_lasso(const Nbw& a, const Lasso& w) {
  if (w.cycle.empty()) throw std::invalid_argument("lasso cycle must be nonempty");
  std::size_t n = w.positions();
  std::size_t q = a.nstates();
  if (q == 0) return false;
  std::vector<std::uint32_t> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = ap_valuation(a.aps, w.at(i));

  auto node = [&](std::size_t i, int s) { return i * q + static_cast<std::size_t>(s); };
  std::size_t nn = n * q;

  // reachable set from (0, start)
  std::vector<char> reach(nn, 0);
  std::vector<std::size_t> stack = {node(0, a.start)};
  reach[node(0, a.start)] = 1;
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    std::size_t i = v / q;
    int s = static_cast<int>(v % q);
    for (const auto& e : a.out[s]) {
      if (!dnf_matches(e.label, vals[i])) continue;
      std::size_t u = node(w.next(i), e.target);
      if (!reach[u]) {
        reach[u] = 1;
        stack.push_back(u);
      }
    }
  }

  // iterative Tarjan over the reachable subgraph
  std::vector<int> index(nn, -1), low(nn, 0);
  std::vector<char> on(nn, 0);
  std::vector<std::size_t> sccstack;
  int counter = 0;
  struct Frame {
    std::size_t v;
    std::size_t edge = 0;
  };
  for (std::size_t root = 0; root < nn; ++root) {
    if (!reach[root] || index[root] >= 0) continue;
    std::vector<Frame> frames = {{root}};
    while (!frames.empty()) {
      Frame& f = frames.back();
      std::size_t v = f.v;
      if (f.edge == 0) {
        index[v] = low[v] = counter++;
        sccstack.push_back(v);
        on[v] = 1;
      }
      std::size_t i = v / q;
      int s = static_cast<int>(v % q);
      bool descended = false;
      while (f.edge < a.out[s].size()) {
        const auto& e = a.out[s][f.edge++];
        if (!dnf_matches(e.label, vals[i])) continue;
        std::size_t u = node(w.next(i), e.target);
        if (!reach[u]) continue;
        if (index[u] < 0) {
          frames.push_back({u});
          descended = true;
          break;
        }
        if (on[u]) low[v] = std::min(low[v], index[u]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        // pop one component; nontrivial if >1 node or a matching self-loop
        std::vector<std::size_t> comp;
        while (true) {
          std::size_t u = sccstack.back();
          sccstack.pop_back();
          on[u] = 0;
          comp.push_back(u);
          if (u == v) break;
        }
        bool nontrivial = comp.size() > 1;
        if (!nontrivial) {
          std::size_t u = comp[0];
          std::size_t ui = u / q;
          int us = static_cast<int>(u % q);
          for (const auto& e : a.out[us])
            if (e.target == us && w.next(ui) == ui && dnf_matches(e.label, vals[ui]))
              nontrivial = true;
        }
        if (nontrivial)
          for (std::size_t u : comp)
            if (a.accepting[u % q]) return true;
      }
      frames.pop_back();
      if (!frames.empty()) {
        Frame& parent = frames.back();
        low[parent.v] = std::min(low[parent.v], low[v]);
      }
    }
  }
  return false;
}

// ---- LTL -> NBW via tableau construction ----

namespace buchi_detail {

// Subformulas of the NNF input, indexed for bitset bookkeeping (at most 64).
struct FormulaTable {
  std::vector<const LtlFormula*> formulas;
  std::vector<AtomicProp> aps;

  int ap_index(const AtomicProp& p) {
    for (std::size_t i = 0; i < aps.size(); ++i)
      if (aps[i] == p) return static_cast<int>(i);
    if (aps.size() >= kMaxAps) throw std::runtime_error("atomic proposition limit exceeded");
    aps.push_back(p);
    return static_cast<int>(aps.size() - 1);
  }

  bool same(const LtlFormula& a, const LtlFormula& b) const {
    if (a.kind != b.kind) return false;
    if (a.kind == LtlFormula::Kind::Ap) return a.ap == b.ap;
    if (a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
      if (!same(*a.args[i], *b.args[i])) return false;
    return true;
  }

  int index(const LtlFormula& f) {
    for (std::size_t i = 0; i < formulas.size(); ++i)
      if (same(*formulas[i], f)) return static_cast<int>(i);
    if (formulas.size() >= 64) throw std::runtime_error("formula too large (subformula limit)");
    formulas.push_back(&f);
    if (f.kind == LtlFormula::Kind::Ap) ap_index(f.ap);
    if (f.kind == LtlFormula::Kind::Not) ap_index(f.args[0]->ap);
    return static_cast<int>(formulas.size() - 1);
  }
};

struct TableauNode {
  std::set<int> incoming;  // node ids; -1 is the virtual initial marker
  std::uint64_t old_ = 0;
  std::uint64_t next_ = 0;
};

struct Tableau {
  FormulaTable table;
  std::vector<TableauNode> nodes;

  static bool has(std::uint64_t set, int i) { return (set >> i) & 1; }
  static std::uint64_t put(std::uint64_t set, int i) { return set | (1ull << i); }

  // literal = Ap or Not(Ap); returns complement id if it is a subformula
  int complement_of(int id) {
    const LtlFormula& f = *table.formulas[id];
    for (std::size_t i = 0; i < table.formulas.size(); ++i) {
      const LtlFormula& g = *table.formulas[i];
      if (f.kind == LtlFormula::Kind::Ap && g.kind == LtlFormula::Kind::Not &&
          g.args[0]->ap == f.ap)
        return static_cast<int>(i);
      if (f.kind == LtlFormula::Kind::Not && g.kind == LtlFormula::Kind::Ap &&
          f.args[0]->ap == g.ap)
        return static_cast<int>(i);
    }
    return -1;
  }

  void expand(std::set<int> incoming, std::uint64_t newset, std::uint64_t old_,
              std::uint64_t next_) {
    using K = LtlFormula::Kind;
    if (newset == 0) {
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].old_ == old_ && nodes[i].next_ == next_) {
          nodes[i].incoming.insert(incoming.begin(), incoming.end());
          return;
        }
      }
      nodes.push_back({std::move(incoming), old_, next_});
      int id = static_cast<int>(nodes.size() - 1);
      expand({id}, next_, 0, 0);
      return;
    }
    int pick = 0;
    while (!has(newset, pick)) ++pick;
    newset &= ~(1ull << pick);
    const LtlFormula& f = *table.formulas[pick];
    switch (f.kind) {
      case K::False:
        return;  // contradiction, drop this branch
      case K::True:
        expand(std::move(incoming), newset, old_, next_);
        return;
      case K::Ap:
      case K::Not: {
        int comp = complement_of(pick);
        if (comp >= 0 && has(old_, comp)) return;
        expand(std::move(incoming), newset, put(old_, pick), next_);
        return;
      }
      case K::And: {
        std::uint64_t add = 0;
        for (const auto& arg : f.args) {
          int id = table.index(*arg);
          if (!has(old_, id)) add = put(add, id);
        }
        expand(std::move(incoming), newset | add, put(old_, pick), next_);
        return;
      }
      case K::Or: {
        int a = table.index(*f.args[0]);
        int b = table.index(*f.args[1]);
        expand(incoming, has(old_, a) ? newset : put(newset, a), put(old_, pick), next_);
        expand(std::move(incoming), has(old_, b) ? newset : put(newset, b), put(old_, pick),
               next_);
        return;
      }
      case K::Next: {
        int a = table.index(*f.args[0]);
        expand(std::move(incoming), newset, put(old_, pick), put(next_, a));
        return;
      }
      case K::Until: {
        int a = table.index(*f.args[0]);
        int b = table.index(*f.args[1]);
        expand(incoming, has(old_, a) ? newset : put(newset, a), put(old_, pick),
               put(next_, pick));
        expand(std::move(incoming), has(old_, b) ? newset : put(newset, b), put(old_, pick),
               next_);
        return;
      }
      case K::Release: {
        int a = table.index(*f.args[0]);
        int b = table.index(*f.args[1]);
        std::uint64_t both = newset;
        if (!has(old_, a)) both = put(both, a);
        if (!has(old_, b)) both = put(both, b);
        expand(incoming, both, put(old_, pick), next_);
        expand(std::move(incoming), has(old_, b) ? newset : put(newset, b), put(old_, pick),
               put(next_, pick));
        return;
      }
      case K::Globally:
      case K::Finally:
        throw std::logic_error("tableau input must be in negation normal form");
    }
  }
};

// Merges states with identical outgoing edges and acceptance, repeatedly.
inline void merge_equivalent(Nbw& a) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < a.nstates() && !changed; ++i) {
      for (std::size_t j = i + 1; j < a.nstates() && !changed; ++j) {
        if (a.accepting[i] != a.accepting[j]) continue;
        auto key = [](const std::vector<Nbw::Edge>& es) {
          std::vector<std::pair<int, LabelDnf>> k;
          for (const auto& e : es) {
            LabelDnf d = e.label;
            std::sort(d.begin(), d.end());
            k.emplace_back(e.target, std::move(d));
          }
          std::sort(k.begin(), k.end());
          return k;
        };
        if (key(a.out[i]) != key(a.out[j])) continue;
        // redirect j to i and remove j
        Nbw b;
        b.aps = a.aps;
        auto remap = [&](int s) {
          if (s == static_cast<int>(j)) s = static_cast<int>(i);
          return s > static_cast<int>(j) ? s - 1 : s;
        };
        b.start = remap(a.start);
        for (std::size_t s = 0; s < a.nstates(); ++s) {
          if (s == j) continue;
          b.add_state(a.state_names[s], a.accepting[s]);
        }
        for (std::size_t s = 0; s < a.nstates(); ++s) {
          if (s == j) continue;
          for (const auto& e : a.out[s]) {
            Nbw::Edge ne{remap(e.target), e.label};
            b.out[remap(static_cast<int>(s))].push_back(std::move(ne));
          }
        }
        // dedup identical edges created by the merge
        for (auto& es : b.out) {
          std::vector<Nbw::Edge> kept;
          for (auto& e : es) {
            bool dup = false;
            for (const auto& k : kept)
              if (k.target == e.target && k.label == e.label) dup = true;
            if (!dup) kept.push_back(std::move(e));
          }
          es = std::move(kept);
        }
        a = std::move(b);
        changed = true;
      }
    }
  }
}

// Removes states that are unreachable from the start or cannot reach a cycle
// through an accepting state. The start state survives even when dead.
inline void prune_dead(Nbw& a) {
  std::size_t n = a.nstates();
  if (n == 0) return;
  std::vector<char> reach(n, 0);
  std::vector<int> stack = {a.start};
  reach[a.start] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (const auto& e : a.out[v])
      if (!e.label.empty() && !reach[e.target]) {
        reach[e.target] = 1;
        stack.push_back(e.target);
      }
  }

  // states on a cycle through an accepting state: accepting SCC members
  std::vector<int> comp(n, -1);
  {
    // Tarjan
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<char> on(n, 0);
    std::vector<int> sccstack;
    int counter = 0, comps = 0;
    struct Frame {
      int v;
      std::size_t edge = 0;
    };
    for (std::size_t root = 0; root < n; ++root) {
      if (index[root] >= 0) continue;
      std::vector<Frame> frames = {{static_cast<int>(root)}};
      while (!frames.empty()) {
        Frame& f = frames.back();
        int v = f.v;
        if (f.edge == 0) {
          index[v] = low[v] = counter++;
          sccstack.push_back(v);
          on[v] = 1;
        }
        bool descended = false;
        while (f.edge < a.out[v].size()) {
          const auto& e = a.out[v][f.edge++];
          if (e.label.empty()) continue;
          int u = e.target;
          if (index[u] < 0) {
            frames.push_back({u});
            descended = true;
            break;
          }
          if (on[u]) low[v] = std::min(low[v], index[u]);
        }
        if (descended) continue;
        if (low[v] == index[v]) {
          while (true) {
            int u = sccstack.back();
            sccstack.pop_back();
            on[u] = 0;
            comp[u] = comps;
            if (u == v) break;
          }
          ++comps;
        }
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      }
    }
  }
  std::vector<char> comp_cycle(n, 0), comp_acc(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& e : a.out[v]) {
      if (e.label.empty()) continue;
      if (comp[e.target] == comp[v]) comp_cycle[comp[v]] = 1;
    }
    if (a.accepting[v]) comp_acc[comp[v]] = 1;
  }
  // live = can reach a component that both cycles and contains acceptance
  std::vector<char> live(n, 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (live[v]) continue;
      bool ok = comp_cycle[comp[v]] && comp_acc[comp[v]];
      if (!ok)
        for (const auto& e : a.out[v])
          if (!e.label.empty() && live[e.target]) ok = true;
      if (ok) {
        live[v] = 1;
        changed = true;
      }
    }
  }

  std::vector<int> remap(n, -1);
  Nbw b;
  b.aps = a.aps;
  for (std::size_t v = 0; v < n; ++v) {
    bool keep = (reach[v] && live[v]) || static_cast<int>(v) == a.start;
    if (keep) remap[v] = b.add_state(a.state_names[v], a.accepting[v]);
  }
  b.start = remap[a.start];
  for (std::size_t v = 0; v < n; ++v) {
    if (remap[v] < 0) continue;
    for (const auto& e : a.out[v]) {
      if (e.label.empty() || remap[e.target] < 0) continue;
      b.out[remap[v]].push_back({remap[e.target], e.label});
    }
  }
  a = std::move(b);
}

}  // namespace buchi_detail

// Büchi automaton for the formula (which must not be trivially empty-language
// at the syntax level; a False input yields an automaton with an empty
// language). Tableau construction, degeneralization over the Until
// subformulas, then pruning and state merging.
inline Nbw translate_ltl(const LtlPtr& formula, const TransitionSystem& ts) {
  (void)ts;
  LtlPtr f = to_nnf(formula);
  buchi_detail::Tableau tb;
  int root = tb.table.index(*f);
  tb.expand({-1}, 1ull << root, 0, 0);

  // acceptance sets, one per Until subformula
  std::vector<int> untils;
  for (std::size_t i = 0; i < tb.table.formulas.size(); ++i)
    if (tb.table.formulas[i]->kind == LtlFormula::Kind::Until)
      untils.push_back(static_cast<int>(i));

  std::size_t nnodes = tb.nodes.size();
  auto in_set = [&](std::size_t node, int u) {
    int g = tb.table.index(*tb.table.formulas[u]->args[1]);
    return !buchi_detail::Tableau::has(tb.nodes[node].old_, u) ||
           buchi_detail::Tableau::has(tb.nodes[node].old_, g);
  };

  // node labels: conjunction of the literals in old
  std::vector<LabelCube> labels(nnodes);
  for (std::size_t i = 0; i < nnodes; ++i) {
    for (std::size_t fi = 0; fi < tb.table.formulas.size(); ++fi) {
      if (!buchi_detail::Tableau::has(tb.nodes[i].old_, static_cast<int>(fi))) continue;
      const LtlFormula& g = *tb.table.formulas[fi];
      if (g.kind == LtlFormula::Kind::Ap)
        labels[i].pos |= 1u << tb.table.ap_index(g.ap);
      else if (g.kind == LtlFormula::Kind::Not)
        labels[i].neg |= 1u << tb.table.ap_index(g.args[0]->ap);
    }
  }

  std::size_t k = untils.size();
  Nbw a;
  a.aps = tb.table.aps;

  if (k <= 1) {
    // no counter needed
    a.start = a.add_state("init", false);
    std::vector<int> ids(nnodes);
    for (std::size_t i = 0; i < nnodes; ++i)
      ids[i] = a.add_state("n" + std::to_string(i), k == 0 || in_set(i, untils[0]));
    for (std::size_t i = 0; i < nnodes; ++i)
      for (int src : tb.nodes[i].incoming)
        a.out[src < 0 ? a.start : ids[src]].push_back({ids[i], {labels[i]}});
  } else {
    // counter automaton: advance past index c when the source is in set c
    a.start = a.add_state("init", false);
    std::vector<std::vector<int>> ids(nnodes, std::vector<int>(k, -1));
    for (std::size_t i = 0; i < nnodes; ++i)
      for (std::size_t c = 0; c < k; ++c)
        ids[i][c] = a.add_state("n" + std::to_string(i) + "c" + std::to_string(c),
                                c == 0 && in_set(i, untils[0]));
    for (std::size_t i = 0; i < nnodes; ++i) {
      for (int src : tb.nodes[i].incoming) {
        if (src < 0) {
          a.out[a.start].push_back({ids[i][0], {labels[i]}});
          continue;
        }
        for (std::size_t c = 0; c < k; ++c) {
          std::size_t cn = in_set(static_cast<std::size_t>(src), untils[c]) ? (c + 1) % k : c;
          a.out[ids[src][c]].push_back({ids[i][cn], {labels[i]}});
        }
      }
    }
  }

  // drop cubes that demand two locations at once
  for (auto& es : a.out) {
    for (auto& e : es) {
      LabelDnf kept;
      for (const auto& cube : e.label) {
        std::uint32_t at_pos = 0;
        for (std::size_t i = 0; i < a.aps.size(); ++i)
          if (a.aps[i].kind == AtomicProp::Kind::AtLoc && (cube.pos >> i) & 1)
            at_pos |= 1u << i;
        if ((at_pos & (at_pos - 1)) == 0) kept.push_back(cube);
      }
      e.label = std::move(kept);
    }
  }

  buchi_detail::prune_dead(a);
  buchi_detail::merge_equivalent(a);
  return a;
}

// ---- possible letters, determinism, completeness ----

// Valuations realizable by actual program states: at most one at() bit set
// (none, when some program location is not mentioned), constraints free.
inline std::vector<std::uint32_t> possible_valuations(const Nbw& a, const TransitionSystem& ts) {
  std::vector<int> at_idx, c_idx;
  for (std::size_t i = 0; i < a.aps.size(); ++i)
    (a.aps[i].kind == AtomicProp::Kind::AtLoc ? at_idx : c_idx).push_back(static_cast<int>(i));
  std::vector<std::uint32_t> at_patterns;
  for (int i : at_idx) at_patterns.push_back(1u << i);
  if (at_idx.size() < ts.nlocs()) at_patterns.push_back(0);
  std::vector<std::uint32_t> out;
  for (std::uint32_t base : at_patterns) {
    for (std::uint32_t m = 0; m < (1u << c_idx.size()); ++m) {
      std::uint32_t val = base;
      for (std::size_t j = 0; j < c_idx.size(); ++j)
        if ((m >> j) & 1) val |= 1u << c_idx[j];
      out.push_back(val);
    }
  }
  return out;
}

// Deterministic on every realizable valuation: at most one successor state.
// Conservative for correlated constraint propositions (all masks are
// considered realizable).
inline bool is_deterministic(const Nbw& a, const TransitionSystem& ts) {
  auto vals = possible_valuations(a, ts);
  for (std::size_t s = 0; s < a.nstates(); ++s) {
    for (std::uint32_t v : vals) {
      int target = -1;
      for (const auto& e : a.out[s]) {
        if (!dnf_matches(e.label, v)) continue;
        if (target >= 0 && target != e.target) return false;
        target = e.target;
      }
    }
  }
  return true;
}

inline bool is_complete(const Nbw& a, const TransitionSystem& ts) {
  auto vals = possible_valuations(a, ts);
  for (std::size_t s = 0; s < a.nstates(); ++s)
    for (std::uint32_t v : vals) {
      bool any = false;
      for (const auto& e : a.out[s])
        if (dnf_matches(e.label, v)) any = true;
      if (!any) return false;
    }
  return true;
}

// Adds a non-accepting sink so every state has a move on every valuation.
// Returns the sink id (existing behavior is untouched when already complete).
inline int complete_with_sink(Nbw& a, const TransitionSystem& ts) {
  auto vals = possible_valuations(a, ts);
  std::vector<std::vector<std::uint32_t>> uncovered(a.nstates());
  bool any = false;
  for (std::size_t s = 0; s < a.nstates(); ++s)
    for (std::uint32_t v : vals) {
      bool hit = false;
      for (const auto& e : a.out[s])
        if (dnf_matches(e.label, v)) hit = true;
      if (!hit) {
        uncovered[s].push_back(v);
        any = true;
      }
    }
  if (!any) return -1;
  int sink = a.add_state("sink", false);
  a.out[sink].push_back({sink, {LabelCube{}}});
  std::uint32_t all = 0;
  for (std::size_t i = 0; i < a.aps.size(); ++i) all |= 1u << i;
  for (std::size_t s = 0; s + 1 < a.nstates(); ++s) {
    if (uncovered[s].empty()) continue;
    // one full cube per uncovered valuation, then a merge pass to shrink
    std::set<LabelCube> cubes;
    for (std::uint32_t v : uncovered[s]) cubes.insert(LabelCube{v, all & ~v});
    auto merge_once = [&] {
      for (auto it = cubes.begin(); it != cubes.end(); ++it)
        for (auto jt = std::next(it); jt != cubes.end(); ++jt) {
          std::uint32_t flip = (it->pos ^ jt->pos);
          if (flip != (it->neg ^ jt->neg)) continue;
          if ((flip & (flip - 1)) != 0 || flip == 0) continue;
          LabelCube m{it->pos & ~flip, it->neg & ~flip};
          cubes.erase(jt);
          cubes.erase(it);
          cubes.insert(m);
          return true;
        }
      return false;
    };
    while (merge_once()) {
    }
    a.out[s].push_back({sink, LabelDnf(cubes.begin(), cubes.end())});
  }
  return sink;
}

// ---- HOA v1 subset ----

namespace buchi_detail {

struct HoaLabelParser {
  const std::string& s;
  std::size_t i = 0;
  explicit HoaLabelParser(const std::string& text) : s(text) {}

  void ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }

  // boolean formula over AP indices -> DNF
  LabelDnf parse_or() {
    LabelDnf lhs = parse_and();
    while (eat('|')) {
      LabelDnf rhs = parse_and();
      lhs.insert(lhs.end(), rhs.begin(), rhs.end());
    }
    return lhs;
  }
  LabelDnf parse_and() {
    LabelDnf lhs = parse_unary();
    while (eat('&')) {
      LabelDnf rhs = parse_unary();
      LabelDnf out;
      for (const auto& a : lhs)
        for (const auto& b : rhs) {
          LabelCube c{a.pos | b.pos, a.neg | b.neg};
          if ((c.pos & c.neg) == 0) out.push_back(c);
        }
      lhs = std::move(out);
    }
    return lhs;
  }
  LabelDnf parse_unary() {
    ws();
    if (eat('!')) {
      LabelDnf inner = parse_unary();
      // complement: conjunction of negated cubes, expanded to DNF
      LabelDnf acc = {LabelCube{}};
      for (const auto& cube : inner) {
        LabelDnf lits;
        for (std::size_t b = 0; b < 32; ++b) {
          if ((cube.pos >> b) & 1) lits.push_back(LabelCube{0, 1u << b});
          if ((cube.neg >> b) & 1) lits.push_back(LabelCube{1u << b, 0});
        }
        LabelDnf next;
        for (const auto& a : acc)
          for (const auto& l : lits) {
            LabelCube c{a.pos | l.pos, a.neg | l.neg};
            if ((c.pos & c.neg) == 0) next.push_back(c);
          }
        acc = std::move(next);
      }
      return acc;
    }
    if (eat('(')) {
      LabelDnf inner = parse_or();
      if (!eat(')')) throw std::runtime_error("HOA label: expected ')'");
      return inner;
    }
    ws();
    if (i < s.size() && s[i] == 't') {
      ++i;
      return {LabelCube{}};
    }
    if (i < s.size() && s[i] == 'f') {
      ++i;
      return {};
    }
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j == i) throw std::runtime_error("HOA label: expected AP index");
    int ap = std::stoi(s.substr(i, j - i));
    i = j;
    return {LabelCube{1u << ap, 0}};
  }
};

}  // namespace buchi_detail

// Reads a state-based Büchi automaton in HOA v1 (single start state,
// Acceptance: 1 Inf(0)). AP names are parsed against the program: at(name)
// or a polynomial comparison, both canonicalized.
inline Nbw parse_hoa(const std::string& text, const TransitionSystem& ts) {
  std::istringstream in(text);
  std::string line;
  Nbw a;
  int nstates = -1;
  std::vector<int> ap_remap;
  bool acceptance_ok = false;
  bool in_body = false;
  int cur_state = -1;
  std::vector<bool> seen_state;

  auto trim = [](std::string s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };

  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '/') continue;
    if (!in_body) {
      if (line == "--BODY--") {
        if (nstates < 0) throw std::runtime_error("HOA: missing States header");
        if (!acceptance_ok) throw std::runtime_error("HOA: acceptance must be Buchi (1 Inf(0))");
        for (int i = 0; i < nstates; ++i) a.add_state("q" + std::to_string(i), false);
        seen_state.assign(nstates, false);
        in_body = true;
        continue;
      }
      auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string head = line.substr(0, colon);
      std::string rest = trim(line.substr(colon + 1));
      if (head == "HOA") {
        if (rest != "v1") throw std::runtime_error("HOA: unsupported version " + rest);
      } else if (head == "States") {
        nstates = std::stoi(rest);
      } else if (head == "Start") {
        if (rest.find('&') != std::string::npos)
          throw std::runtime_error("HOA: universal start unsupported");
        a.start = std::stoi(rest);
      } else if (head == "AP") {
        std::istringstream as(rest);
        int nap = 0;
        as >> nap;
        for (int i = 0; i < nap; ++i) {
          std::string name;
          as >> std::ws;
          if (as.get() != '"') throw std::runtime_error("HOA: AP names must be quoted");
          std::getline(as, name, '"');
          LtlPtr f = parse_ltl(name, ts);
          if (f->kind != LtlFormula::Kind::Ap)
            throw std::runtime_error("HOA: AP must be a single atomic proposition: " + name);
          int idx = a.find_ap(f->ap);
          if (idx < 0) {
            if (a.aps.size() >= kMaxAps)
              throw std::runtime_error("atomic proposition limit exceeded");
            a.aps.push_back(f->ap);
            idx = static_cast<int>(a.aps.size() - 1);
          }
          ap_remap.push_back(idx);
        }
      } else if (head == "Acceptance") {
        std::string squished;
        for (char c : rest)
          if (!std::isspace(static_cast<unsigned char>(c))) squished += c;
        acceptance_ok = squished == "1Inf(0)";
      } else if (head == "acc-name") {
        if (rest == "Buchi") acceptance_ok = true;
      }
      // name:, tool:, properties: ignored
      continue;
    }
    if (line == "--END--") break;
    if (line.rfind("State:", 0) == 0) {
      std::string rest = trim(line.substr(6));
      if (!rest.empty() && rest[0] == '[')
        throw std::runtime_error("HOA: state labels unsupported");
      std::istringstream ss(rest);
      ss >> cur_state;
      if (cur_state < 0 || cur_state >= nstates) throw std::runtime_error("HOA: bad state id");
      seen_state[cur_state] = true;
      std::string tail;
      std::getline(ss, tail);
      auto brace = tail.find('{');
      if (brace != std::string::npos) a.accepting[cur_state] = true;
      continue;
    }
    // edge: [label] target, with optional {...} acceptance (unsupported)
    if (line[0] != '[') throw std::runtime_error("HOA: implicit edge labels unsupported");
    auto close = line.find(']');
    if (close == std::string::npos) throw std::runtime_error("HOA: unterminated label");
    std::string lbl = line.substr(1, close - 1);
    std::string rest = trim(line.substr(close + 1));
    if (rest.find('{') != std::string::npos)
      throw std::runtime_error("HOA: transition-based acceptance unsupported");
    if (cur_state < 0) throw std::runtime_error("HOA: edge before any State:");
    int target = std::stoi(rest);
    if (target < 0 || target >= nstates) throw std::runtime_error("HOA: bad edge target");
    buchi_detail::HoaLabelParser lp(lbl);
    LabelDnf dnf = lp.parse_or();
    std::uint32_t declared =
        ap_remap.empty() ? 0 : (std::uint32_t(1) << ap_remap.size()) - 1;
    for (const auto& cube : dnf)
      if ((cube.pos & ~declared) || (cube.neg & ~declared))
        throw std::runtime_error("HOA: label references an undeclared AP");
    // remap AP indices from file order to automaton order
    LabelDnf remapped;
    for (const auto& cube : dnf) {
      LabelCube c;
      for (std::size_t b = 0; b < ap_remap.size(); ++b) {
        if ((cube.pos >> b) & 1) c.pos |= 1u << ap_remap[b];
        if ((cube.neg >> b) & 1) c.neg |= 1u << ap_remap[b];
      }
      if ((c.pos & c.neg) == 0) remapped.push_back(c);
    }
    a.out[cur_state].push_back({target, std::move(remapped)});
  }
  if (!in_body) throw std::runtime_error("HOA: missing --BODY--");
  if (a.start < 0 || a.start >= nstates) throw std::runtime_error("HOA: bad start state");
  return a;
}

inline std::string to_hoa(const Nbw& a, const TransitionSystem& ts) {
  std::ostringstream os;
  os << "HOA: v1\n";
  os << "States: " << a.nstates() << "\n";
  os << "Start: " << a.start << "\n";
  os << "AP: " << a.aps.size();
  for (const auto& p : a.aps) os << " \"" << p.to_string(ts) << "\"";
  os << "\n";
  os << "acc-name: Buchi\n";
  os << "Acceptance: 1 Inf(0)\n";
  os << "--BODY--\n";
  for (std::size_t s = 0; s < a.nstates(); ++s) {
    os << "State: " << s;
    if (a.accepting[s]) os << " {0}";
    os << "\n";
    for (const auto& e : a.out[s]) {
      os << "[";
      if (e.label.empty()) {
        os << "f";
      } else {
        for (std::size_t c = 0; c < e.label.size(); ++c) {
          if (c) os << " | ";
          const LabelCube& cube = e.label[c];
          if (cube.pos == 0 && cube.neg == 0) {
            os << "t";
            continue;
          }
          bool first = true;
          for (std::size_t b = 0; b < a.aps.size(); ++b) {
            if ((cube.pos >> b) & 1) {
              os << (first ? "" : " & ") << b;
              first = false;
            }
            if ((cube.neg >> b) & 1) {
              os << (first ? "!" : " & !") << b;
              first = false;
            }
          }
        }
      }
      os << "] " << e.target << "\n";
    }
  }
  os << "--END--\n";
  return os.str();
}

}  // namespace buchirank
