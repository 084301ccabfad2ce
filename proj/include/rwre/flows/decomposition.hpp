#pragma once

// Cycle cancellation and decomposition of a unit flow into weighted paths:
// pick a path of positive flow, give it weight p = min over its edges,
// subtract, repeat. Afterwards theta(e) = sum of p over paths containing e.

#include "rwre/flows/graph.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <vector>

namespace rwre::flows {

template <class S>
struct WeightedPath {
  std::vector<int> edges;
  S weight;
};

template <class S>
struct Decomposition {
  std::vector<WeightedPath<S>> paths;
  std::size_t cycles_cancelled = 0;
  /// Flow removed around directed cycles before decomposing.
  S cycle_mass = S(0);
};

namespace detail {

template <class S>
S default_tol() {
  if constexpr (std::is_floating_point_v<S>) return S(1e-14);
  else return S(0);
}

template <class S>
bool alive(const S& v, const S& tol) {
  return v > tol;
}

/// Finds one directed cycle among edges with value > tol; returns its edges.
template <class S>
std::vector<int> find_cycle(const BasicFlow<S>& f, const S& tol) {
  const DirectedGraph& g = *f.graph;
  const int n = g.vertex_count();
  std::vector<char> color(static_cast<std::size_t>(n), 0);
  std::vector<int> via(static_cast<std::size_t>(n), -1);
  std::vector<std::size_t> cursor(static_cast<std::size_t>(n), 0);
  for (int root = 0; root < n; ++root) {
    if (color[root]) continue;
    std::vector<int> stack{root};
    color[root] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      const auto& out = g.out_edges(u);
      if (cursor[u] == out.size()) {
        color[u] = 2;
        stack.pop_back();
        continue;
      }
      const int e = out[cursor[u]++];
      if (!alive(f.values[e], tol)) continue;
      const int v = g.edge(e).head;
      if (color[v] == 0) {
        color[v] = 1;
        via[v] = e;
        stack.push_back(v);
      } else if (color[v] == 1) {
        std::vector<int> cycle{e};
        for (int w = u; w != v; w = g.edge(via[w]).tail) cycle.push_back(via[w]);
        std::reverse(cycle.begin(), cycle.end());
        return cycle;
      }
    }
  }
  return {};
}

}  // namespace detail

/// Removes all directed cycles from the support; divergence is unchanged and
/// no edge value increases.
template <class S>
BasicFlow<S> cancel_cycles(BasicFlow<S> f, std::size_t* cancelled = nullptr, S* mass = nullptr,
                           S tol = detail::default_tol<S>()) {
  std::size_t count = 0;
  S removed(0);
  for (auto& v : f.values)
    if (!detail::alive(v, tol)) v = S(0);
  for (;;) {
    const std::vector<int> cycle = detail::find_cycle(f, tol);
    if (cycle.empty()) break;
    S m = f.values[cycle.front()];
    for (int e : cycle) m = std::min(m, f.values[e]);
    for (int e : cycle) {
      f.values[e] -= m;
      if (!detail::alive(f.values[e], tol)) f.values[e] = S(0);
    }
    removed += m;
    ++count;
  }
  if (cancelled) *cancelled = count;
  if (mass) *mass = removed;
  return f;
}

/// Decomposes a unit flow leaving `source`. Throws ContractError unless
/// div(source) = 1 and every other vertex has div <= 0 (within tol).
template <class S>
Decomposition<S> path_decomposition(const BasicFlow<S>& flow, int source,
                                    S tol = detail::default_tol<S>()) {
  const DirectedGraph& g = *flow.graph;
  const int n = g.vertex_count();
  g.check_vertex(source);
  for (const auto& v : flow.values)
    if (v < S(0)) throw ContractError("flow has a negative edge value");
  S check_tol = tol;
  if constexpr (std::is_floating_point_v<S>) check_tol = std::max<S>(tol, S(1e-10));
  {
    using std::abs;
    const S ds = flow.divergence(source);
    if (abs(ds - S(1)) > check_tol) throw ContractError("path decomposition requires a unit flow");
    for (int v = 0; v < n; ++v)
      if (v != source && flow.divergence(v) > check_tol)
        throw ContractError("path decomposition requires a single source");
  }

  Decomposition<S> out;
  BasicFlow<S> f = cancel_cycles(flow, &out.cycles_cancelled, &out.cycle_mass, tol);
  std::vector<S> deficit(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) deficit[v] = -f.divergence(v);

  const std::size_t limit = f.support_size() + static_cast<std::size_t>(n) + 1;
  for (std::size_t iter = 0; iter < limit; ++iter) {
    WeightedPath<S> path;
    int u = source;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    seen[u] = 1;
    while (u == source || !detail::alive(deficit[u], tol)) {
      int next = -1;
      for (int e : g.out_edges(u))
        if (detail::alive(f.values[e], tol)) {
          next = e;
          break;
        }
      if (next < 0) break;
      path.edges.push_back(next);
      u = g.edge(next).head;
      if (seen[u]) throw NumericError("cycle left in support after cancellation");
      seen[u] = 1;
    }
    if (path.edges.empty()) break;
    if (!detail::alive(deficit[u], tol)) throw NumericError("flow path ended away from a sink");
    S w = deficit[u];
    for (int e : path.edges) w = std::min(w, f.values[e]);
    for (int e : path.edges) {
      f.values[e] -= w;
      if (!detail::alive(f.values[e], tol)) f.values[e] = S(0);
    }
    deficit[u] -= w;
    path.weight = w;
    out.paths.push_back(std::move(path));
  }
  return out;
}

/// theta(e) = sum of weights of the paths through e.
template <class S>
BasicFlow<S> reconstruct(const Decomposition<S>& dec, GraphPtr graph) {
  BasicFlow<S> f(std::move(graph));
  for (const auto& p : dec.paths)
    for (int e : p.edges) f.values[e] += p.weight;
  return f;
}

}  // namespace rwre::flows
