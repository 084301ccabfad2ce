#include "rwre/errors.hpp"
#include "rwre/flows/box_flow.hpp"
#include "rwre/flows/decomposition.hpp"
#include "rwre/flows/maxflow.hpp"
#include "rwre/flows/selftest.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

using namespace rwre;
using namespace rwre::flows;
using lattice::Site;

namespace {

GraphPtr graph_of(int n, std::vector<std::pair<int, int>> edges) {
  auto g = std::make_shared<DirectedGraph>(n);
  for (auto [u, v] : edges) g->add_edge(u, v);
  return g;
}

// Brute-force cut condition over subsets K containing the source. With
// `reachable_only`, only K whose members are reachable from the source
// inside K are examined.
bool cut_oracle(const DemandProblem<Rational>& p, bool reachable_only) {
  const DirectedGraph& g = *p.graph;
  const int n = g.vertex_count();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (!(mask >> p.source & 1u)) continue;
    if (reachable_only) {
      unsigned seen = 1u << p.source, grown = 0;
      while (grown != seen) {
        grown = seen;
        for (const auto& e : g.edges())
          if ((seen >> e.tail & 1u) && (mask >> e.head & 1u)) seen |= 1u << e.head;
      }
      if (seen != mask) continue;
    }
    Rational cap(0), outside(0);
    for (int e = 0; e < g.edge_count(); ++e)
      if ((mask >> g.edge(e).tail & 1u) && !(mask >> g.edge(e).head & 1u)) cap += p.capacity[e];
    for (int v = 0; v < n; ++v)
      if (!(mask >> v & 1u)) outside += p.demand[v];
    if (cap < outside) return false;
  }
  return true;
}

ThetaSpec small_spec() {
  ThetaSpec s;
  s.source = Site{0, 0};
  s.target = Site{20, 0};
  s.slot = 0;
  s.alpha = {1, 1, 1, 1};
  s.R = 6;
  return s;
}

}  // namespace

TEST_CASE("divergence") {
  const auto g = graph_of(3, {{0, 1}, {1, 2}});
  Flow f(g);
  CHECK(f.divergence(0) == 0.0);
  f.values = {1.0, 0.0};
  CHECK(f.divergence(0) == 1.0);
  CHECK(f.divergence(1) == -1.0);
  f.values = {0.5, 0.5};
  CHECK(f.divergence(1) == 0.0);
  CHECK_THROWS_AS(f.divergence(3), ParameterError);
  auto h = std::make_shared<DirectedGraph>(2);
  CHECK_THROWS_AS(h->add_edge(1, 1), ParameterError);
  CHECK_THROWS_AS(h->add_edge(0, 2), ParameterError);
}

TEST_CASE("feasible flow on one edge") {
  DemandProblem<Rational> p{graph_of(2, {{0, 1}}), {Rational(1)}, 0, {Rational(0), Rational(1)}};
  auto r = feasible_flow(p);
  REQUIRE(r.feasible);
  CHECK(r.flow->values[0] == 1);

  p.capacity = {Rational(1, 2)};
  r = feasible_flow(p);
  CHECK_FALSE(r.feasible);
  CHECK(r.cut_set == std::vector<int>{0});
  CHECK(r.cut_capacity == Rational(1, 2));
  CHECK(r.outside_demand == 1);

  p.capacity = {Rational(-1)};
  CHECK_THROWS_AS(feasible_flow(p), ParameterError);
}

TEST_CASE("feasibility agrees with exhaustive cut enumeration") {
  Rng rng(2024);
  int feasible = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto p = random_demand_problem(rng, 7);
    const auto r = feasible_flow(p);
    const bool oracle = cut_oracle(p, false);
    REQUIRE(r.feasible == oracle);
    REQUIRE(cut_oracle(p, true) == oracle);
    if (r.feasible) {
      ++feasible;
      const auto& f = *r.flow;
      Rational total(0);
      for (auto d : p.demand) total += d;
      for (int e = 0; e < p.graph->edge_count(); ++e) {
        REQUIRE(f.values[e] >= 0);
        REQUIRE(f.values[e] <= p.capacity[e]);
      }
      for (int v = 0; v < p.graph->vertex_count(); ++v)
        REQUIRE(f.divergence(v) == (v == p.source ? total : Rational(0)) - p.demand[v]);
    } else {
      REQUIRE(r.cut_capacity < r.outside_demand);
      REQUIRE(std::find(r.cut_set.begin(), r.cut_set.end(), p.source) != r.cut_set.end());
    }
  }
  CHECK(feasible > 50);
  CHECK(feasible < 950);
}

TEST_CASE("merged box graph") {
  const auto box = merged_box_graph(Site{0, 0}, 0, 2);
  const auto& g = *box.graph;
  CHECK(g.out_edges(box.merged_vertex).size() == 6);
  CHECK(g.in_edges(box.merged_vertex).size() == 6);
  CHECK(g.sites_of(box.merged_vertex).size() == 2);
  for (int e : g.out_edges(box.merged_vertex)) CHECK(g.edge(e).head != box.merged_vertex);
  CHECK(g.vertex_count() == 24);

  std::set<std::string> merged_boundary, plain;
  for (int v : box.boundary)
    for (const Site& s : g.sites_of(v)) merged_boundary.insert(s.to_string());
  for (const Site& s : box_sites(Site{0, 0}, 2))
    if (s.linf_norm() == 2) plain.insert(s.to_string());
  CHECK(merged_boundary == plain);
  CHECK(static_cast<std::int64_t>(plain.size()) == boundary_size(2, 2));
  CHECK(boundary_size(3, 2) == 125 - 27);

  CHECK_THROWS_AS(merged_box_graph(Site{0, 0}, 0, 1), ParameterError);
}

TEST_CASE("kappa_i and default radius") {
  const std::vector<double> a{1, 1, 1, 1};
  CHECK(kappa_i(a, 0) == 6.0);
  CHECK(kappa_i_exact(a, 1) == 6);
  const std::vector<double> b{1.5, 0.4, 0.2, 0.4};
  CHECK(kappa_i(b, 0) == doctest::Approx(3.3));
  CHECK(kappa_i(b, 1) == doctest::Approx(4.2));
  CHECK(BoxFlowSpec::default_radius(a) == 6);
  BoxFlowSpec spec{Site{0, 0}, 0, 5, {1, 1, 1, 1}};
  CHECK_THROWS_AS(spec.validate(), ParameterError);
}

TEST_CASE("box flows respect the capacity bound") {
  const BoxFlowSpec spec{Site{0, 0}, 0, 6, {1, 1, 1, 1}};
  spec.validate();
  const auto box = merged_box_graph(spec.center, spec.slot, spec.R);
  const auto f = source_box_flow<Rational>(spec, box);
  const auto& g = *box.graph;
  const Rational kappa = kappa_i_exact(spec.alpha, 0);
  CHECK(f.divergence(box.merged_vertex) == 1);
  Rational boundary_total(0);
  const Rational share(1, boundary_size(2, 6));
  for (int v : box.boundary) {
    CHECK(f.divergence(v) == -share);
    boundary_total += f.divergence(v);
  }
  CHECK(boundary_total == -1);
  for (int e = 0; e < g.edge_count(); ++e) REQUIRE(f.values[e] * kappa <= 1);

  const auto s = sink_box_flow<Rational>(spec, box);
  CHECK(s.divergence(box.merged_vertex) == -1);
  for (int v : box.boundary) CHECK(s.divergence(v) == share);
}

TEST_CASE("connector paths") {
  const Site a{0, 0}, b{20, 0};
  const std::size_t count = static_cast<std::size_t>(boundary_size(2, 2));
  const auto c = connector_paths(a, b, 2, count);
  CHECK(c.paths.size() == count);
  const auto audit = audit_connector_paths(c, a, b, 2);
  CHECK_MESSAGE(audit.ok, audit.failure);

  // independent re-check of disjointness, endpoints and the length bound
  std::set<std::string> used, starts;
  for (const auto& p : c.paths) {
    REQUIRE(!p.empty());
    CHECK(static_cast<double>(p.size()) <= c.K1 * 20 + c.K2);
    CHECK((p.front().from - a).linf_norm() == 2);
    CHECK((p.back().to() - b).linf_norm() == 2);
    starts.insert(p.front().from.to_string());
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      CHECK((p[k].to() - a).linf_norm() > 2);
      CHECK((p[k].to() - b).linf_norm() > 2);
    }
    for (const auto& e : p) {
      const std::string fwd = e.from.to_string() + ">" + e.to().to_string();
      const std::string rev = e.to().to_string() + ">" + e.from.to_string();
      REQUIRE(used.count(fwd) == 0);
      REQUIRE(used.count(rev) == 0);
      used.insert(fwd);
    }
  }
  CHECK(starts.size() == count);

  const auto one = connector_paths(a, b, 2, 1);
  CHECK(one.paths.size() == 1);
  CHECK(audit_connector_paths(one, a, b, 2).ok);

  CHECK_THROWS_AS(connector_paths(a, a, 2, 1), GeometryError);
  CHECK_THROWS_AS(connector_paths(a, Site{4, 0}, 2, 1), GeometryError);
}

TEST_CASE("connector audit catches a shared edge") {
  const Site a{0, 0}, b{20, 0};
  auto c = connector_paths(a, b, 2, 4);
  c.paths[1] = c.paths[0];
  CHECK_FALSE(audit_connector_paths(c, a, b, 2).ok);
}

TEST_CASE("theta flow certificate") {
  const auto spec = small_spec();
  const auto theta = build_theta(spec);
  const auto report = verify_flow_certificate(theta.flow, spec);
  for (const auto& c : report.checks) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
  CHECK(theta.gamma == Rational(1, 8));
  CHECK(report.gamma == 0.125);

  const auto& g = *theta.flow.graph;
  for (int v = 0; v < g.vertex_count(); ++v) {
    const Rational div = theta.flow.divergence(v);
    if (v == theta.source_vertex) REQUIRE(div == 1);
    else if (v == theta.sink_vertex) REQUIRE(div == -1);
    else REQUIRE(div == 0);
  }
  const std::size_t bound =
      theta.box_edges + static_cast<std::size_t>(boundary_size(2, 6)) *
                            static_cast<std::size_t>(theta.connectors.K1 * 20 + theta.connectors.K2);
  CHECK(theta.flow.support_size() <= bound);

  SUBCASE("capacity fault names the edge") {
    auto bad = theta.flow;
    int e = 0;
    while (bad.values[e] == 0) ++e;
    bad.values[e] = Rational(1);
    const auto r = verify_flow_certificate(bad, spec);
    const auto* cap = r.find("capacity_bound");
    REQUIRE(cap);
    CHECK_FALSE(cap->passed);
    CHECK(cap->witness.find(g.lattice_edge(e).from.to_string()) != std::string::npos);
  }
  SUBCASE("divergence fault names the vertex") {
    auto bad = theta.flow;
    int e = 0;
    while (g.edge(e).tail == theta.source_vertex || g.edge(e).head == theta.source_vertex ||
           g.edge(e).tail == theta.sink_vertex || g.edge(e).head == theta.sink_vertex || bad.values[e] == 0)
      ++e;
    bad.values[e] /= 2;
    const auto r = verify_flow_certificate(bad, spec);
    const auto* div = r.find("divergence_support");
    REQUIRE(div);
    CHECK_FALSE(div->passed);
    const auto named = [&](int v) { return div->witness.find(g.sites_of(v).front().to_string()) != std::string::npos; };
    CHECK((named(g.edge(e).tail) || named(g.edge(e).head)));
  }
}

TEST_CASE("path decomposition") {
  {
    const auto g = graph_of(3, {{0, 1}, {1, 2}});
    ExactFlow f(g);
    f.values = {Rational(1), Rational(1)};
    const auto d = path_decomposition(f, 0);
    REQUIRE(d.paths.size() == 1);
    CHECK(d.paths[0].weight == 1);
  }
  {
    const auto g = graph_of(4, {{0, 1}, {1, 3}, {0, 2}, {2, 3}});
    Flow f(g);
    f.values = {0.3, 0.3, 0.7, 0.7};
    const auto d = path_decomposition(f, 0);
    REQUIRE(d.paths.size() == 2);
    std::multiset<double> w;
    for (const auto& p : d.paths) w.insert(p.weight);
    CHECK(*w.begin() == doctest::Approx(0.3));
    CHECK(*w.rbegin() == doctest::Approx(0.7));
  }
  {
    // a cycle riding on a path is cancelled before decomposing
    const auto g = graph_of(4, {{0, 1}, {1, 2}, {2, 1}, {1, 3}});
    ExactFlow f(g);
    f.values = {Rational(1), Rational(1, 2), Rational(1, 2), Rational(1)};
    const auto d = path_decomposition(f, 0);
    CHECK(d.cycles_cancelled == 1);
    CHECK(d.cycle_mass == Rational(1, 2));
    REQUIRE(d.paths.size() == 1);
  }
  {
    const auto g = graph_of(2, {{0, 1}});
    Flow f(g);
    f.values = {0.5};
    CHECK_THROWS_AS(path_decomposition(f, 0), ContractError);
  }

  const auto theta = build_theta(small_spec());
  const auto dec = path_decomposition(theta.flow, theta.source_vertex);
  Rational total(0);
  for (const auto& p : dec.paths) {
    REQUIRE(p.weight > 0);
    total += p.weight;
  }
  CHECK(total == 1);
  CHECK(dec.paths.size() <= theta.flow.support_size());
  const auto back = reconstruct(dec, theta.flow.graph);
  CHECK(back.values == theta.flow.values);

  const auto fd = to_double_flow(theta.flow);
  const auto dd = path_decomposition(fd, theta.source_vertex);
  const auto bd = reconstruct(dd, fd.graph);
  for (std::size_t e = 0; e < fd.values.size(); ++e) REQUIRE(std::abs(bd.values[e] - fd.values[e]) < 1e-10);
}
