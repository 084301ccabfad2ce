#include "rwre/flows/graph.hpp"

namespace rwre::flows {

std::string to_string(const Rational& v) {
  if (denominator(v) == 1) return numerator(v).str();
  return numerator(v).str() + "/" + denominator(v).str();
}

DirectedGraph::DirectedGraph(int vertices) {
  if (vertices < 0) throw ParameterError("vertex count must be nonnegative");
  out_.resize(static_cast<std::size_t>(vertices));
  in_.resize(static_cast<std::size_t>(vertices));
}

int DirectedGraph::add_vertex() {
  out_.emplace_back();
  in_.emplace_back();
  return vertex_count() - 1;
}

void DirectedGraph::check_vertex(int v) const {
  if (v < 0 || v >= vertex_count()) throw ParameterError("unknown vertex " + std::to_string(v));
}

int DirectedGraph::add_edge(int tail, int head) {
  check_vertex(tail);
  check_vertex(head);
  if (tail == head) throw ParameterError("self-loop at vertex " + std::to_string(tail));
  edges_.push_back({tail, head});
  const int e = edge_count() - 1;
  out_[tail].push_back(e);
  in_[head].push_back(e);
  return e;
}

int DirectedGraph::add_lattice_vertex(const std::vector<Site>& sites) {
  if (sites.empty()) throw ParameterError("lattice vertex needs at least one site");
  if (vertex_sites_.size() != out_.size())
    throw ParameterError("cannot mix lattice and plain vertices");
  const int v = add_vertex();
  vertex_sites_.push_back(sites);
  for (const Site& s : sites)
    if (!site_index_.try_emplace(s, v).second)
      throw ParameterError("site " + s.to_string() + " already has a vertex");
  return v;
}

int DirectedGraph::add_lattice_edge(const Site& from, int slot) {
  const LatticeEdge le{from, slot};
  const auto t = vertex_of(from);
  const auto h = vertex_of(le.to());
  if (!t || !h) throw ParameterError("lattice edge endpoint without a vertex");
  const int e = add_edge(*t, *h);
  lattice_edges_.push_back(le);
  return e;
}

std::optional<int> DirectedGraph::vertex_of(const Site& x) const {
  const auto it = site_index_.find(x);
  if (it == site_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> DirectedGraph::find_lattice_edge(const Site& from, int slot) const {
  const auto v = vertex_of(from);
  if (!v) return std::nullopt;
  for (int e : out_[*v]) {
    const auto& le = lattice_edges_[e];
    if (le.slot == slot && le.from == from) return e;
  }
  return std::nullopt;
}

Flow to_double_flow(const ExactFlow& f) {
  Flow out(f.graph);
  for (std::size_t i = 0; i < f.values.size(); ++i) out.values[i] = to_double(f.values[i]);
  return out;
}

}  // namespace rwre::flows
