#pragma once

// Feasibility of a flow with vertex demands, decided by a max-flow on the
// graph augmented with a sink delta and edges (x, delta) of capacity p_x.
// A feasible flow has div = sum_x p_x (delta_{x0} - delta_x); otherwise the
// source side K of a minimum cut satisfies c(d+K) < sum_{x not in K} p_x.

#include "rwre/flows/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

namespace rwre::flows {

template <class S>
struct DemandProblem {
  GraphPtr graph;
  std::vector<S> capacity;
  int source = 0;
  std::vector<S> demand;

  void validate() const {
    if (!graph) throw ParameterError("demand problem without a graph");
    if (capacity.size() != static_cast<std::size_t>(graph->edge_count()))
      throw ParameterError("one capacity per edge required");
    if (demand.size() != static_cast<std::size_t>(graph->vertex_count()))
      throw ParameterError("one demand per vertex required");
    graph->check_vertex(source);
    for (const auto& c : capacity)
      if (c < S(0)) throw ParameterError("negative capacity");
    for (const auto& p : demand)
      if (p < S(0)) throw ParameterError("negative demand");
  }
};

template <class S>
struct FeasibilityResult {
  bool feasible = false;
  std::optional<BasicFlow<S>> flow;
  /// Source side of a minimum cut (contains the source). When infeasible it
  /// violates the cut condition.
  std::vector<int> cut_set;
  /// c(d+K) over edges of the original graph leaving K.
  S cut_capacity = S(0);
  /// sum of p_x over x outside K.
  S outside_demand = S(0);
  S max_flow = S(0);
  S total_demand = S(0);
};

namespace detail {

template <class S>
bool positive(const S& v, const S& eps) {
  return v > eps;
}

template <class S>
S zero_tolerance(const std::vector<S>& capacity, const std::vector<S>& demand) {
  if constexpr (std::is_floating_point_v<S>) {
    S scale = 0;
    for (auto c : capacity) scale = std::max(scale, c);
    for (auto p : demand) scale = std::max(scale, p);
    return scale * S(1e-13);
  } else {
    return S(0);
  }
}

}  // namespace detail

/// Edmonds-Karp (shortest augmenting paths) on the demand-augmented graph.
template <class S>
FeasibilityResult<S> feasible_flow(const DemandProblem<S>& problem) {
  problem.validate();
  const DirectedGraph& g = *problem.graph;
  const int n = g.vertex_count();
  const int sink = n;
  const S eps = detail::zero_tolerance(problem.capacity, problem.demand);

  struct Arc {
    int to;
    S residual;
  };
  std::vector<Arc> arcs;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n + 1));
  auto add_arc = [&](int u, int v, const S& c) {
    adj[u].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({v, c});
    adj[v].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({u, S(0)});
  };
  for (int e = 0; e < g.edge_count(); ++e) add_arc(g.edge(e).tail, g.edge(e).head, problem.capacity[e]);
  S total(0);
  for (int v = 0; v < n; ++v) {
    total += problem.demand[v];
    if (problem.demand[v] > S(0)) add_arc(v, sink, problem.demand[v]);
  }

  S value(0);
  std::vector<int> parent_arc(static_cast<std::size_t>(n + 1));
  for (;;) {
    std::fill(parent_arc.begin(), parent_arc.end(), -1);
    std::deque<int> queue{problem.source};
    parent_arc[problem.source] = -2;
    while (!queue.empty() && parent_arc[sink] == -1) {
      const int u = queue.front();
      queue.pop_front();
      for (int a : adj[u]) {
        const int v = arcs[a].to;
        if (parent_arc[v] == -1 && detail::positive(arcs[a].residual, eps)) {
          parent_arc[v] = a;
          queue.push_back(v);
        }
      }
    }
    if (parent_arc[sink] == -1) break;
    S bottleneck = arcs[parent_arc[sink]].residual;
    for (int v = sink; v != problem.source; v = arcs[parent_arc[v] ^ 1].to)
      bottleneck = std::min(bottleneck, arcs[parent_arc[v]].residual);
    for (int v = sink; v != problem.source; v = arcs[parent_arc[v] ^ 1].to) {
      arcs[parent_arc[v]].residual -= bottleneck;
      arcs[parent_arc[v] ^ 1].residual += bottleneck;
    }
    value += bottleneck;
  }

  FeasibilityResult<S> res;
  res.max_flow = value;
  res.total_demand = total;
  if constexpr (std::is_floating_point_v<S>) {
    res.feasible = total - value <= std::max<S>(eps, S(1e-12) * std::max<S>(S(1), total));
  } else {
    res.feasible = value == total;
  }

  // Residual reachability gives the minimum cut.
  std::vector<char> reach(static_cast<std::size_t>(n + 1), 0);
  std::deque<int> queue{problem.source};
  reach[problem.source] = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int a : adj[u]) {
      const int v = arcs[a].to;
      if (!reach[v] && detail::positive(arcs[a].residual, eps)) {
        reach[v] = 1;
        queue.push_back(v);
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    if (reach[v]) res.cut_set.push_back(v);
    else res.outside_demand += problem.demand[v];
  }
  for (int e = 0; e < g.edge_count(); ++e)
    if (reach[g.edge(e).tail] && !reach[g.edge(e).head]) res.cut_capacity += problem.capacity[e];

  if (res.feasible) {
    BasicFlow<S> flow(problem.graph);
    for (int e = 0; e < g.edge_count(); ++e) flow.values[e] = arcs[2 * e + 1].residual;
    res.flow = std::move(flow);
  }
  return res;
}

}  // namespace rwre::flows
