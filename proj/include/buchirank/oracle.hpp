#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "buchirank/product.hpp"
#include "buchirank/witness.hpp"

namespace buchirank {

// Exact finite-state ground truth for box-closed systems: every state
// reachable from the initial region must keep integer values inside
// [lo, hi]^n, otherwise construction aborts and the oracle is inapplicable.
struct OracleGraph {
  long lo = 0, hi = 0;
  std::vector<State> nodes;  // reachable states in BFS order
  std::map<State, int> index;
  std::vector<std::vector<int>> succ;
  std::vector<bool> buchi;
  std::vector<int> init_nodes;
};

namespace oracle_detail {

inline void for_each_box_valuation(std::size_t n, long lo, long hi,
                                   const std::function<void(const std::vector<Rational>&)>& f) {
  std::vector<long> v(n, lo);
  std::vector<Rational> vals(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) vals[i] = rat(v[i]);
    f(vals);
    std::size_t i = 0;
    while (i < n && v[i] == hi) v[i++] = lo;
    if (i == n) break;
    ++v[i];
  }
}

// Strongly connected components over the masked subgraph; returns component
// ids (-1 for masked-out nodes) via an iterative Tarjan walk.
inline std::vector<int> scc_ids(const std::vector<std::vector<int>>& succ,
                                const std::vector<bool>& mask, int& ncomp) {
  int n = static_cast<int>(succ.size());
  std::vector<int> comp(n, -1), low(n, 0), disc(n, -1), stack;
  std::vector<bool> on_stack(n, false);
  int timer = 0;
  ncomp = 0;
  struct Frame {
    int node;
    std::size_t edge;
  };
  for (int root = 0; root < n; ++root) {
    if (!mask[root] || disc[root] != -1) continue;
    std::vector<Frame> frames{{root, 0}};
    disc[root] = low[root] = timer++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [u, ei] = frames.back();
      if (ei < succ[u].size()) {
        int v = succ[u][ei++];
        if (!mask[v]) continue;
        if (disc[v] == -1) {
          disc[v] = low[v] = timer++;
          stack.push_back(v);
          on_stack[v] = true;
          frames.push_back({v, 0});
        } else if (on_stack[v]) {
          low[u] = std::min(low[u], disc[v]);
        }
      } else {
        if (low[u] == disc[u]) {
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp[w] = ncomp;
            if (w == u) break;
          }
          ++ncomp;
        }
        int done = u;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().node] = std::min(low[frames.back().node], low[done]);
      }
    }
  }
  return comp;
}

// Nodes that lie on some cycle of the masked subgraph: nontrivial component
// or a self-loop.
inline std::vector<bool> on_cycle(const std::vector<std::vector<int>>& succ,
                                  const std::vector<bool>& mask) {
  int ncomp = 0;
  auto comp = scc_ids(succ, mask, ncomp);
  std::vector<int> size(ncomp, 0);
  for (std::size_t u = 0; u < succ.size(); ++u)
    if (comp[u] >= 0) ++size[comp[u]];
  std::vector<bool> out(succ.size(), false);
  for (std::size_t u = 0; u < succ.size(); ++u) {
    if (comp[u] < 0) continue;
    if (size[comp[u]] > 1) out[u] = true;
    for (int v : succ[u])
      if (v == static_cast<int>(u)) out[u] = true;
  }
  return out;
}

inline std::vector<int> bfs_path(const std::vector<std::vector<int>>& succ,
                                 const std::vector<int>& sources,
                                 const std::vector<bool>& targets) {
  std::vector<int> parent(succ.size(), -2);
  std::vector<int> queue;
  for (int s : sources)
    if (parent[s] == -2) {
      parent[s] = -1;
      queue.push_back(s);
    }
  int hit = -1;
  for (int s : sources)
    if (targets[s]) hit = s;
  for (std::size_t head = 0; head < queue.size() && hit < 0; ++head) {
    int u = queue[head];
    for (int v : succ[u]) {
      if (parent[v] != -2) continue;
      parent[v] = u;
      if (targets[v]) {
        hit = v;
        break;
      }
      queue.push_back(v);
    }
  }
  if (hit < 0) return {};
  std::vector<int> path;
  for (int u = hit; u != -1; u = parent[u]) path.push_back(u);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace oracle_detail

inline OracleGraph build_oracle_graph(const ProductSystem& prod, long lo, long hi) {
  OracleGraph g;
  g.lo = lo;
  g.hi = hi;
  std::size_t n = prod.sys.nvars();

  auto intern = [&](const State& s) {
    auto it = g.index.find(s);
    if (it != g.index.end()) return it->second;
    for (const Rational& v : s.vals)
      if (!is_integer(v) || v < lo || v > hi) {
        std::ostringstream os;
        os << "oracle inapplicable: reachable state " << witness_detail::describe(prod, s)
           << " leaves the integer box [" << lo << "," << hi << "]";
        throw std::runtime_error(os.str());
      }
    int id = static_cast<int>(g.nodes.size());
    g.index.emplace(s, id);
    g.nodes.push_back(s);
    g.succ.emplace_back();
    g.buchi.push_back(prod.buchi[s.loc]);
    return id;
  };

  oracle_detail::for_each_box_valuation(n, lo, hi, [&](const std::vector<Rational>& vals) {
    if (!prod.sys.theta_init.eval(vals)) return;
    g.init_nodes.push_back(intern(State{prod.sys.init, vals}));
  });
  for (std::size_t head = 0; head < g.nodes.size(); ++head) {
    State s = g.nodes[head];
    for (const auto& [t, nxt] : successors(prod.sys, s)) {
      (void)t;
      int v = intern(nxt);
      g.succ[head].push_back(v);
    }
  }
  return g;
}

// Some run from the initial region visits the accepting set infinitely often.
inline bool oracle_exists_buchi_run(const OracleGraph& g) {
  std::vector<bool> all(g.nodes.size(), true);
  auto cyc = oracle_detail::on_cycle(g.succ, all);
  for (std::size_t u = 0; u < g.nodes.size(); ++u)
    if (g.buchi[u] && cyc[u]) return true;
  return false;
}

// Every infinite run from the initial region visits the accepting set
// infinitely often: no reachable cycle avoids it.
inline bool oracle_all_runs_buchi(const OracleGraph& g) {
  std::vector<bool> non_buchi(g.nodes.size());
  for (std::size_t u = 0; u < g.nodes.size(); ++u) non_buchi[u] = !g.buchi[u];
  auto cyc = oracle_detail::on_cycle(g.succ, non_buchi);
  for (std::size_t u = 0; u < g.nodes.size(); ++u)
    if (cyc[u]) return false;
  return true;
}

// Tabular existential witness: values along one accepting lasso, measuring
// steps to the next accepting visit on that run.
inline ConcreteWitness oracle_ebrf(const OracleGraph& g) {
  using namespace oracle_detail;
  std::vector<bool> all(g.nodes.size(), true);
  auto cyc = on_cycle(g.succ, all);
  int b = -1;
  for (std::size_t u = 0; u < g.nodes.size(); ++u)
    if (g.buchi[u] && cyc[u]) {
      b = static_cast<int>(u);
      break;
    }
  if (b < 0) throw std::runtime_error("no accepting lasso exists");

  // Shortest b -> b cycle.
  std::vector<bool> is_b(g.nodes.size(), false);
  is_b[b] = true;
  std::vector<int> cycle;
  {
    std::vector<int> starts = g.succ[b];
    bool self = false;
    for (int v : starts)
      if (v == b) self = true;
    if (self) {
      cycle = {b};
    } else {
      auto tail = bfs_path(g.succ, starts, is_b);
      cycle.push_back(b);
      for (std::size_t i = 0; i + 1 < tail.size(); ++i) cycle.push_back(tail[i]);
    }
  }
  std::vector<bool> in_cycle(g.nodes.size(), false);
  for (int u : cycle) in_cycle[u] = true;
  auto stem = bfs_path(g.succ, g.init_nodes, in_cycle);

  ConcreteWitness w;
  w.universal = false;
  w.degree = 0;
  std::vector<Rational> value(g.nodes.size(), rat(-1));
  std::size_t m = cycle.size();
  value[cycle[0]] = rat(0);
  for (std::size_t i = m; i-- > 1;)
    value[cycle[i]] = g.buchi[cycle[i]] ? rat(0) : Rational(value[cycle[(i + 1) % m]] + 1);
  for (std::size_t j = stem.size() - 1; j-- > 0;)
    value[stem[j]] = g.buchi[stem[j]] ? rat(0) : Rational(value[stem[j + 1]] + 1);
  for (int u : cycle) w.table[g.nodes[u]] = value[u];
  for (int u : stem) w.table[g.nodes[u]] = value[u];
  w.init_vals = g.nodes[stem.front()].vals;
  return w;
}

// Tabular universal witness: 0 on the accepting set, elsewhere one plus the
// maximum over successors, well defined exactly when no reachable cycle
// avoids the accepting set.
inline ConcreteWitness oracle_ubrf(const OracleGraph& g) {
  std::size_t n = g.nodes.size();
  std::vector<int> indeg(n, 0);
  for (std::size_t u = 0; u < n; ++u) {
    if (g.buchi[u]) continue;
    for (int v : g.succ[u])
      if (!g.buchi[v]) ++indeg[v];
  }
  std::vector<int> order;
  for (std::size_t u = 0; u < n; ++u)
    if (!g.buchi[u] && indeg[u] == 0) order.push_back(static_cast<int>(u));
  for (std::size_t head = 0; head < order.size(); ++head)
    for (int v : g.succ[order[head]])
      if (!g.buchi[v] && --indeg[v] == 0) order.push_back(v);
  std::size_t non_buchi = 0;
  for (std::size_t u = 0; u < n; ++u)
    if (!g.buchi[u]) ++non_buchi;
  if (order.size() != non_buchi)
    throw std::runtime_error("universal ranking undefined: some run avoids the accepting set");

  std::vector<Rational> value(n, rat(0));
  for (std::size_t k = order.size(); k-- > 0;) {
    int u = order[k];
    Rational best = rat(-1);
    for (int v : g.succ[u]) best = std::max(best, value[v]);
    value[u] = best + 1;
  }
  ConcreteWitness w;
  w.universal = true;
  w.degree = 0;
  for (std::size_t u = 0; u < n; ++u) w.table[g.nodes[u]] = value[u];
  return w;
}

inline std::string oracle_to_dot(const OracleGraph& g, const ProductSystem& prod) {
  std::ostringstream os;
  os << "digraph oracle {\n";
  for (std::size_t u = 0; u < g.nodes.size(); ++u) {
    os << "  n" << u << " [label=\"" << witness_detail::describe(prod, g.nodes[u]) << "\"";
    if (g.buchi[u]) os << " peripheries=2";
    os << "];\n";
  }
  for (int s : g.init_nodes) os << "  i" << s << " [shape=point]; i" << s << " -> n" << s << ";\n";
  for (std::size_t u = 0; u < g.nodes.size(); ++u)
    for (int v : g.succ[u]) os << "  n" << u << " -> n" << v << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace buchirank
