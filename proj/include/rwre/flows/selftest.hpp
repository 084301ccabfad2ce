#pragma once

// Random small demand problems and the brute-force cut condition, for the
// feasibility self-test: a flow exists iff c(d+K) >= sum_{x not in K} p_x
// for every K containing the source.

#include "rwre/flows/maxflow.hpp"
#include "rwre/random.hpp"

#include <cstdint>

namespace rwre::flows {

/// 2..max_vertices vertices, source 0, each ordered pair an edge with
/// probability 1/2, capacities and demands small random fractions.
inline DemandProblem<Rational> random_demand_problem(Rng& rng, int max_vertices) {
  auto pick = [&rng](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  const int n = 2 + pick(max_vertices - 1);
  auto g = std::make_shared<DirectedGraph>(n);
  DemandProblem<Rational> p;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v && rng.uniform() < 0.5) {
        g->add_edge(u, v);
        p.capacity.emplace_back(pick(13), 1 + pick(6));
      }
  p.graph = g;
  p.source = 0;
  p.demand.resize(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) p.demand[v] = rng.uniform() < 0.2 ? Rational(0) : Rational(pick(9), 1 + pick(4));
  return p;
}

/// Checks every K containing the source (2^(n-1) sets).
template <class S>
bool cut_condition_holds(const DemandProblem<S>& p) {
  const DirectedGraph& g = *p.graph;
  const int n = g.vertex_count();
  if (n > 20) throw ParameterError("exhaustive cut check limited to 20 vertices");
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!(mask >> p.source & 1u)) continue;
    S cut(0), outside(0);
    for (int e = 0; e < g.edge_count(); ++e)
      if ((mask >> g.edge(e).tail & 1u) && !(mask >> g.edge(e).head & 1u)) cut += p.capacity[e];
    for (int v = 0; v < n; ++v)
      if (!(mask >> v & 1u)) outside += p.demand[v];
    if (cut < outside) return false;
  }
  return true;
}

struct FeasibilitySelftest {
  std::int64_t instances = 0;
  std::int64_t agreements = 0;
  std::int64_t feasible = 0;
  /// Returned flows violating 0 <= theta <= c or the divergence identity.
  std::int64_t flow_violations = 0;
  /// Infeasible verdicts whose reported K fails to violate the cut condition.
  std::int64_t bad_certificates = 0;
  bool passed() const { return agreements == instances && flow_violations == 0 && bad_certificates == 0; }
};

inline FeasibilitySelftest run_feasibility_selftest(std::int64_t instances, int max_vertices, std::uint64_t seed) {
  FeasibilitySelftest out;
  Rng rng(domain_seed(seed, SeedDomain::synthetic, 0x666c6f77));
  for (std::int64_t i = 0; i < instances; ++i) {
    const auto p = random_demand_problem(rng, max_vertices);
    const auto res = feasible_flow(p);
    const bool oracle = cut_condition_holds(p);
    ++out.instances;
    if (res.feasible == oracle) ++out.agreements;
    if (res.feasible) {
      ++out.feasible;
      const auto& f = *res.flow;
      const DirectedGraph& g = *p.graph;
      Rational total(0);
      for (int v = 0; v < g.vertex_count(); ++v)
        if (v != p.source) total += p.demand[v];
      bool ok = true;
      for (int e = 0; e < g.edge_count(); ++e)
        if (f.values[e] < 0 || f.values[e] > p.capacity[e]) ok = false;
      for (int v = 0; v < g.vertex_count(); ++v) {
        const Rational want = v == p.source ? total : -p.demand[v];
        if (f.divergence(v) != want) ok = false;
      }
      if (!ok) ++out.flow_violations;
    } else if (!(res.cut_capacity < res.outside_demand)) {
      ++out.bad_certificates;
    }
  }
  return out;
}

}  // namespace rwre::flows
