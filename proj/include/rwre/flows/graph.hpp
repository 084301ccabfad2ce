#pragma once

// Finite directed graphs, edge flows and their divergence.

#include "rwre/errors.hpp"
#include "rwre/lattice.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace rwre::flows {

using lattice::Site;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(double v) { return v; }
inline double to_double(const Rational& v) { return v.convert_to<double>(); }
std::string to_string(const Rational& v);

struct Edge {
  int tail = 0;
  int head = 0;
};

/// Lattice origin of an edge: the step from `from` in direction `slot`.
struct LatticeEdge {
  Site from;
  int slot = 0;
  Site to() const { return from + lattice::unit_step(from.dim(), slot); }
};

/// Directed graph without self-loops. Lattice graphs additionally record the
/// sites behind each vertex (a merged vertex has two) and each edge.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  explicit DirectedGraph(int vertices);

  int add_vertex();
  /// Throws ParameterError on self-loops or unknown vertices.
  int add_edge(int tail, int head);

  int vertex_count() const { return static_cast<int>(out_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& out_edges(int v) const { return out_[v]; }
  const std::vector<int>& in_edges(int v) const { return in_[v]; }
  void check_vertex(int v) const;

  // Lattice annotation.
  bool is_lattice() const { return !vertex_sites_.empty(); }
  /// Adds a vertex standing for all of `sites` (merged when size > 1).
  int add_lattice_vertex(const std::vector<Site>& sites);
  /// Adds the lattice edge from -> from + e_slot; both sites must be known.
  int add_lattice_edge(const Site& from, int slot);
  std::optional<int> vertex_of(const Site& x) const;
  const std::vector<Site>& sites_of(int v) const { return vertex_sites_[v]; }
  const LatticeEdge& lattice_edge(int e) const { return lattice_edges_[e]; }
  std::optional<int> find_lattice_edge(const Site& from, int slot) const;

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
  std::vector<std::vector<Site>> vertex_sites_;
  std::vector<LatticeEdge> lattice_edges_;
  std::unordered_map<Site, int, lattice::SiteHash> site_index_;
};

using GraphPtr = std::shared_ptr<const DirectedGraph>;

/// Nonnegative edge function on a graph.
template <class S>
struct BasicFlow {
  GraphPtr graph;
  std::vector<S> values;

  BasicFlow() = default;
  explicit BasicFlow(GraphPtr g) : graph(std::move(g)), values(static_cast<std::size_t>(graph->edge_count()), S(0)) {}

  /// div(v) = outflow - inflow. Throws ParameterError on unknown vertex.
  S divergence(int v) const {
    graph->check_vertex(v);
    S s(0);
    for (int e : graph->out_edges(v)) s += values[e];
    for (int e : graph->in_edges(v)) s -= values[e];
    return s;
  }

  std::size_t support_size() const {
    std::size_t n = 0;
    for (const auto& v : values)
      if (v != S(0)) ++n;
    return n;
  }
};

using Flow = BasicFlow<double>;
using ExactFlow = BasicFlow<Rational>;

Flow to_double_flow(const ExactFlow& f);

}  // namespace rwre::flows
