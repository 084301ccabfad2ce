#include "rwre/flows/box_flow.hpp"

#include "rwre/flows/decomposition.hpp"
#include "rwre/flows/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rwre::flows {

using lattice::unit_step;

double kappa_i(std::span<const double> alpha, int slot) {
  const int d = static_cast<int>(alpha.size() / 2);
  lattice::require_dimension(d);
  if (slot < 0 || slot >= 2 * d) throw ParameterError("direction slot out of range");
  double s = 0.0;
  for (double a : alpha) {
    if (!(a > 0.0)) throw ParameterError("flow weights alpha must be positive");
    s += a;
  }
  return 2.0 * s - (alpha[slot % d] + alpha[slot % d + d]);
}

Rational kappa_i_exact(std::span<const double> alpha, int slot) {
  kappa_i(alpha, slot);  // validation
  const int d = static_cast<int>(alpha.size() / 2);
  Rational s(0);
  for (double a : alpha) s += Rational(a);
  return Rational(2) * s - (Rational(alpha[slot % d]) + Rational(alpha[slot % d + d]));
}

std::vector<Site> box_sites(const Site& x, int R) {
  const int d = x.dim();
  std::vector<Site> out;
  Site off(d);
  for (int j = 0; j < d; ++j) off[j] = -R;
  for (;;) {
    out.push_back(x + off);
    int j = d - 1;
    while (j >= 0 && off[j] == R) {
      off[j] = -R;
      --j;
    }
    if (j < 0) break;
    ++off[j];
  }
  return out;
}

bool in_box(const Site& x, int R, const Site& y) { return (y - x).linf_norm() <= R; }

std::int64_t boundary_size(int d, int R) {
  std::int64_t outer = 1, inner = 1;
  for (int j = 0; j < d; ++j) {
    outer *= 2 * R + 1;
    inner *= 2 * R - 1;
  }
  return outer - inner;
}

MergedBox merged_box_graph(const Site& x, int slot, int R) {
  const int d = x.dim();
  lattice::require_dimension(d);
  if (R < 2) throw ParameterError("merged box needs R >= 2 so the merged pair is interior");
  if (slot < 0 || slot >= 2 * d) throw ParameterError("direction slot out of range");
  const Site partner = x + unit_step(d, slot);

  auto g = std::make_shared<DirectedGraph>();
  MergedBox box;
  box.center = x;
  box.slot = slot;
  box.R = R;
  const auto sites = box_sites(x, R);
  for (const Site& s : sites) {
    if (s == partner) continue;
    if (s == x) box.merged_vertex = g->add_lattice_vertex({x, partner});
    else g->add_lattice_vertex({s});
  }
  for (const Site& s : sites) {
    for (int k = 0; k < 2 * d; ++k) {
      const Site t = s + unit_step(d, k);
      if (!in_box(x, R, t)) continue;
      if ((s == x && t == partner) || (s == partner && t == x)) continue;
      g->add_lattice_edge(s, k);
    }
  }
  for (int v = 0; v < g->vertex_count(); ++v) {
    const Site& s = g->sites_of(v).front();
    if ((s - x).linf_norm() == R) box.boundary.push_back(v);
  }
  box.graph = std::move(g);
  return box;
}

void BoxFlowSpec::validate() const {
  const int d = dim();
  lattice::require_dimension(d);
  if (static_cast<int>(alpha.size()) != 2 * d) throw DimensionError("alpha needs 2d weights");
  double max_kappa = 0.0;
  for (int i = 0; i < 2 * d; ++i) max_kappa = std::max(max_kappa, kappa_i(alpha, i));
  const double min_alpha = *std::min_element(alpha.begin(), alpha.end());
  if (R < 2) throw ParameterError("box radius must be at least 2");
  if (static_cast<double>(R) < max_kappa / min_alpha)
    throw ParameterError("box radius " + std::to_string(R) + " below max kappa / min alpha = " +
                         std::to_string(max_kappa / min_alpha));
  if (!(1.0 / static_cast<double>(boundary_size(d, R)) < min_alpha / kappa()))
    throw ParameterError("box boundary too small: need 1/|dB| < min alpha / kappa_i");
}

int BoxFlowSpec::default_radius(std::span<const double> alpha) {
  const int d = static_cast<int>(alpha.size() / 2);
  lattice::require_dimension(d);
  double max_kappa = 0.0;
  for (int i = 0; i < 2 * d; ++i) max_kappa = std::max(max_kappa, kappa_i(alpha, i));
  const double min_alpha = *std::min_element(alpha.begin(), alpha.end());
  int R = std::max(2, static_cast<int>(std::ceil(max_kappa / min_alpha - 1e-12)));
  while (!(1.0 / static_cast<double>(boundary_size(d, R)) < min_alpha / max_kappa)) ++R;
  return R;
}

namespace {

template <class S>
S alpha_over_kappa(std::span<const double> alpha, int edge_slot, const S& kappa) {
  return S(alpha[edge_slot]) / kappa;
}

template <class S>
S kappa_as(const BoxFlowSpec& spec) {
  if constexpr (std::is_same_v<S, Rational>) return kappa_i_exact(spec.alpha, spec.slot);
  else return spec.kappa();
}

template <class S>
[[noreturn]] void report_infeasible(const FeasibilityResult<S>& r) {
  std::ostringstream os;
  os << "box flow infeasible: cut of " << r.cut_set.size() << " vertices has capacity "
     << to_double(r.cut_capacity) << " < outside demand " << to_double(r.outside_demand);
  throw NumericError(os.str());
}

template <class S>
BasicFlow<S> solve_box(const BoxFlowSpec& spec, const MergedBox& box, bool reversed) {
  spec.validate();
  const DirectedGraph& g = *box.graph;
  const S kappa = kappa_as<S>(spec);
  const S share = S(1) / S(static_cast<long long>(box.boundary.size()));

  DemandProblem<S> prob;
  GraphPtr solve_graph = box.graph;
  if (reversed) {
    auto rg = std::make_shared<DirectedGraph>(g.vertex_count());
    for (const Edge& e : g.edges()) rg->add_edge(e.head, e.tail);
    solve_graph = rg;
  }
  prob.graph = solve_graph;
  prob.source = box.merged_vertex;
  prob.capacity.resize(static_cast<std::size_t>(g.edge_count()));
  for (int e = 0; e < g.edge_count(); ++e)
    prob.capacity[e] = alpha_over_kappa<S>(spec.alpha, g.lattice_edge(e).slot, kappa);
  prob.demand.assign(static_cast<std::size_t>(g.vertex_count()), S(0));
  for (int v : box.boundary) prob.demand[v] = share;

  const auto res = feasible_flow(prob);
  if (!res.feasible) report_infeasible(res);
  BasicFlow<S> out(box.graph);
  out.values = res.flow->values;
  return out;
}

}  // namespace

template <class S>
BasicFlow<S> source_box_flow(const BoxFlowSpec& spec, const MergedBox& box) {
  return solve_box<S>(spec, box, false);
}

template <class S>
BasicFlow<S> sink_box_flow(const BoxFlowSpec& spec, const MergedBox& box) {
  return solve_box<S>(spec, box, true);
}

template BasicFlow<double> source_box_flow<double>(const BoxFlowSpec&, const MergedBox&);
template BasicFlow<Rational> source_box_flow<Rational>(const BoxFlowSpec&, const MergedBox&);
template BasicFlow<double> sink_box_flow<double>(const BoxFlowSpec&, const MergedBox&);
template BasicFlow<Rational> sink_box_flow<Rational>(const BoxFlowSpec&, const MergedBox&);

// ---------------------------------------------------------------------------
// theta

void ThetaSpec::validate() const {
  if (source.dim() != target.dim()) throw DimensionError("theta endpoints differ in dimension");
  BoxFlowSpec{source, slot, R, alpha}.validate();
  if (source == target) throw GeometryError("theta endpoints coincide");
}

ThetaGraphBuilder::ThetaGraphBuilder(const ThetaSpec& spec)
    : graph(std::make_shared<DirectedGraph>()), spec_(spec) {
  const int d = spec.dim();
  graph->add_lattice_vertex({spec.source, spec.source + unit_step(d, spec.slot)});
  graph->add_lattice_vertex({spec.target, spec.target + unit_step(d, spec.slot)});
}

int ThetaGraphBuilder::vertex(const Site& x) {
  if (auto v = graph->vertex_of(x)) return *v;
  return graph->add_lattice_vertex({x});
}

Theta build_theta(const ThetaSpec& spec) {
  spec.validate();
  const int d = spec.dim();
  const BoxFlowSpec spec_a{spec.source, spec.slot, spec.R, spec.alpha};
  const BoxFlowSpec spec_b{spec.target, spec.slot, spec.R, spec.alpha};
  const MergedBox box_a = merged_box_graph(spec.source, spec.slot, spec.R);
  const MergedBox box_b = merged_box_graph(spec.target, spec.slot, spec.R);
  const ExactFlow flow_a = source_box_flow<Rational>(spec_a, box_a);
  const ExactFlow flow_b = sink_box_flow<Rational>(spec_b, box_b);
  const auto n_boundary = static_cast<std::size_t>(boundary_size(d, spec.R));

  Theta theta;
  theta.spec = spec;
  theta.connectors = connector_paths(spec.source, spec.target, spec.R, n_boundary);
  theta.box_edges = static_cast<std::size_t>(box_a.graph->edge_count() + box_b.graph->edge_count());

  ThetaGraphBuilder builder(spec);
  for (const auto* box : {&box_a, &box_b})
    for (int v = 0; v < box->graph->vertex_count(); ++v)
      for (const Site& s : box->graph->sites_of(v)) builder.vertex(s);
  for (const auto& path : theta.connectors.paths)
    for (const auto& e : path) {
      builder.vertex(e.from);
      builder.vertex(e.to());
    }

  std::vector<std::pair<LatticeEdge, Rational>> values;
  for (const auto& [box, flow] : {std::pair{&box_a, &flow_a}, std::pair{&box_b, &flow_b}})
    for (int e = 0; e < box->graph->edge_count(); ++e)
      values.emplace_back(box->graph->lattice_edge(e), flow->values[e]);
  const Rational share = Rational(1) / Rational(static_cast<long long>(n_boundary));
  for (const auto& path : theta.connectors.paths)
    for (const auto& e : path) values.emplace_back(e, share);

  for (const auto& [le, v] : values) builder.graph->add_lattice_edge(le.from, le.slot);
  ExactFlow flow(builder.graph);
  for (std::size_t i = 0; i < values.size(); ++i) flow.values[i] = values[i].second;

  theta.flow = cancel_cycles(std::move(flow));
  theta.source_vertex = *builder.graph->vertex_of(spec.source);
  theta.sink_vertex = *builder.graph->vertex_of(spec.target);
  theta.gamma = kappa_i_exact(spec.alpha, spec.slot) / Rational(static_cast<long long>(n_boundary));
  return theta;
}

// ---------------------------------------------------------------------------
// certificate

bool CertificateReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const CertificateCheck* CertificateReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

template <class S>
std::string show(const S& v) {
  if constexpr (std::is_same_v<S, Rational>) return to_string(v);
  else {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }
}

std::string edge_name(const LatticeEdge& e) {
  return e.from.to_string() + "->" + e.to().to_string();
}

std::string vertex_name(const DirectedGraph& g, int v) {
  std::string s;
  for (const Site& x : g.sites_of(v)) s += (s.empty() ? "" : "+") + x.to_string();
  return s;
}

}  // namespace

template <class S>
CertificateReport verify_flow_certificate(const BasicFlow<S>& flow, const ThetaSpec& spec) {
  CertificateReport rep;
  const DirectedGraph& g = *flow.graph;
  const int d = spec.dim();
  const S tol = std::is_same_v<S, Rational> ? S(0) : S(1e-12);
  using std::abs;

  S kappa;
  S gamma;
  std::int64_t n_boundary = 0;
  try {
    spec.validate();
    n_boundary = boundary_size(d, spec.R);
    if constexpr (std::is_same_v<S, Rational>) kappa = kappa_i_exact(spec.alpha, spec.slot);
    else kappa = spec.kappa();
    gamma = kappa / S(static_cast<long long>(n_boundary));
  } catch (const Error& e) {
    rep.checks.push_back({"spec", false, "", e.what()});
    return rep;
  }
  rep.kappa = to_double(kappa);
  rep.gamma = to_double(gamma);

  auto add = [&](std::string name) -> CertificateCheck& {
    rep.checks.push_back({std::move(name), true, "", ""});
    return rep.checks.back();
  };

  auto& merged = add("merged_endpoints");
  auto lookup = [&](const Site& x) { return g.is_lattice() ? g.vertex_of(x).value_or(-1) : -1; };
  const int src = lookup(spec.source);
  const int snk = lookup(spec.target);
  if (src < 0 || snk < 0 || src != lookup(spec.source + unit_step(d, spec.slot)) ||
      snk != lookup(spec.target + unit_step(d, spec.slot)) || src == snk) {
    merged.passed = false;
    merged.detail = "source or target pair is missing or not merged";
    return rep;
  }

  auto& nonneg = add("nonnegative");
  for (int e = 0; e < g.edge_count(); ++e)
    if (flow.values[e] < S(0)) {
      nonneg.passed = false;
      nonneg.witness = edge_name(g.lattice_edge(e));
      nonneg.detail = show(flow.values[e]);
      break;
    }

  auto& unit = add("unit_strength");
  const S ds = flow.divergence(src);
  unit.detail = "div(source) = " + show(ds);
  if (abs(ds - S(1)) > tol) {
    unit.passed = false;
    unit.witness = vertex_name(g, src);
  }

  auto& support = add("divergence_support");
  for (int v = 0; v < g.vertex_count(); ++v) {
    const S want = v == src ? S(1) : v == snk ? S(-1) : S(0);
    const S got = flow.divergence(v);
    if (abs(got - want) > tol) {
      support.passed = false;
      support.witness = vertex_name(g, v);
      support.detail = "div = " + show(got) + ", expected " + show(want);
      break;
    }
  }

  auto& cap = add("capacity_bound");
  S worst(0);
  for (int e = 0; e < g.edge_count(); ++e) {
    const S ratio = flow.values[e] * kappa / S(spec.alpha[g.lattice_edge(e).slot]);
    if (ratio > worst) worst = ratio;
    if (cap.passed && ratio > S(1) + tol) {
      cap.passed = false;
      cap.witness = edge_name(g.lattice_edge(e));
      cap.detail = "theta * kappa / alpha = " + show(ratio);
    }
  }
  if (cap.passed) cap.detail = "max theta * kappa / alpha = " + show(worst);

  auto& compact = add("compact_support");
  {
    const auto [K1, K2] = connector_length_constants(d, spec.R);
    const auto N = static_cast<double>((spec.target - spec.source).l1_norm());
    const std::int64_t side = 2 * spec.R + 1;
    std::int64_t cells = 1;
    for (int j = 0; j < d - 1; ++j) cells *= side;
    const std::int64_t box_edges = 2 * (2LL * d * (side - 1) * cells - 2);
    const double bound = static_cast<double>(box_edges) + static_cast<double>(n_boundary) * (K1 * N + K2);
    const auto size = flow.support_size();
    compact.detail = "support " + std::to_string(size) + " <= " + std::to_string(static_cast<std::int64_t>(bound));
    if (static_cast<double>(size) > bound) compact.passed = false;
  }

  auto& off = add("exceptional_set_bound");
  off.detail = "gamma = " + show(gamma);
  for (double a : spec.alpha)
    if (!(gamma < S(a))) {
      off.passed = false;
      off.detail = "gamma = " + show(gamma) + " is not below alpha = " + show(a);
    }
  for (int e = 0; off.passed && e < g.edge_count(); ++e) {
    const auto& le = g.lattice_edge(e);
    const bool in_s = (in_box(spec.source, spec.R, le.from) && in_box(spec.source, spec.R, le.to())) ||
                      (in_box(spec.target, spec.R, le.from) && in_box(spec.target, spec.R, le.to()));
    if (in_s) continue;
    if (flow.values[e] * kappa > gamma + tol) {
      off.passed = false;
      off.witness = edge_name(le);
      off.detail = "theta * kappa = " + show(flow.values[e] * kappa) + " > gamma = " + show(gamma);
    }
  }
  return rep;
}

template CertificateReport verify_flow_certificate<double>(const BasicFlow<double>&, const ThetaSpec&);
template CertificateReport verify_flow_certificate<Rational>(const BasicFlow<Rational>&, const ThetaSpec&);

}  // namespace rwre::flows
