#pragma once

// Unit flows theta_{i,x} from the merged pair {x, x+e_i} to {y, y+e_i} with
// theta(e) <= alpha(e) / kappa_i: a max-flow inside each box, joined by
// edge-disjoint connector paths, plus the certificate audit of the result.

#include "rwre/flows/graph.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rwre::flows {

/// kappa_i = 2 sum_j alpha_j - (alpha_i + alpha_{i+d}) for direction slot i.
double kappa_i(std::span<const double> alpha, int slot);
Rational kappa_i_exact(std::span<const double> alpha, int slot);

/// Sites of B(x, R) = {y : |y - x|_inf <= R}, lexicographic order.
std::vector<Site> box_sites(const Site& x, int R);
bool in_box(const Site& x, int R, const Site& y);
/// |dB(x,R)|: box sites with a neighbour outside, (2R+1)^d - (2R-1)^d.
std::int64_t boundary_size(int d, int R);

struct MergedBox {
  GraphPtr graph;
  int merged_vertex = 0;
  std::vector<int> boundary;
  Site center;
  int slot = 0;
  int R = 0;
};

/// B_i(x, R): the box with x and x+e_i identified and the edges between
/// them removed. Throws ParameterError if R < 2.
MergedBox merged_box_graph(const Site& x, int slot, int R);

struct BoxFlowSpec {
  Site center;
  int slot = 0;
  int R = 0;
  std::vector<double> alpha;

  int dim() const { return center.dim(); }
  double kappa() const { return kappa_i(alpha, slot); }
  /// Enforces R >= max_i kappa_i / min_j alpha_j and
  /// 1 / |dB(x,R)| < min_e alpha(e) / kappa_i.
  void validate() const;
  /// Smallest R meeting both constraints (and R >= 2).
  static int default_radius(std::span<const double> alpha);
};

/// Unit flow on B_i(x,R) from the merged vertex leaving uniformly through the
/// boundary, with theta(e) <= alpha(e)/kappa_i. Throws NumericError (with the
/// violating cut) if the max-flow reports infeasibility.
template <class S>
BasicFlow<S> source_box_flow(const BoxFlowSpec& spec, const MergedBox& box);
/// Unit flow entering uniformly from the boundary and ending at the merged
/// vertex, same capacity bound.
template <class S>
BasicFlow<S> sink_box_flow(const BoxFlowSpec& spec, const MergedBox& box);

struct ConnectorPaths {
  std::vector<std::vector<LatticeEdge>> paths;
  /// Length bound K1 * |xB - xA|_1 + K2.
  double K1 = 1.0;
  double K2 = 0.0;
  std::int64_t separation = 0;
  std::size_t max_length = 0;
};

/// Constants of the connector length bound; independent of the separation.
std::pair<double, double> connector_length_constants(int d, int R);

/// `count` simple lattice paths from distinct points of dB(xA,R) to distinct
/// points of dB(xB,R), outside both boxes except at endpoints, pairwise
/// edge-disjoint and never using an edge and its reversal. Boundary points of
/// xA are routed one at a time, nearest to xB first, each by a shortest path
/// in a corridor around the boxes avoiding edges already used.
/// Throws GeometryError if the boxes overlap, touch, or cannot be joined.
ConnectorPaths connector_paths(const Site& xA, const Site& xB, int R, std::size_t count);

struct ConnectorAudit {
  bool ok = true;
  std::string failure;
};
ConnectorAudit audit_connector_paths(const ConnectorPaths& c, const Site& xA, const Site& xB, int R);

struct ThetaSpec {
  Site source;  // x
  Site target;  // y_x
  int slot = 0;
  std::vector<double> alpha;
  int R = 0;

  int dim() const { return source.dim(); }
  double kappa() const { return kappa_i(alpha, slot); }
  void validate() const;
};

struct Theta {
  ThetaSpec spec;
  ExactFlow flow;
  int source_vertex = 0;
  int sink_vertex = 0;
  /// kappa_i / |dB(x,R)|
  Rational gamma;
  ConnectorPaths connectors;
  std::size_t box_edges = 0;  // |E(B_i(x,R))| + |E(B_i(y,R))|
};

Theta build_theta(const ThetaSpec& spec);

/// Lattice graph for a theta flow: vertices for the given sites with the two
/// endpoint pairs merged. Used to rebuild flows read from files.
struct ThetaGraphBuilder {
  explicit ThetaGraphBuilder(const ThetaSpec& spec);
  int vertex(const Site& x);
  std::shared_ptr<DirectedGraph> graph;

 private:
  ThetaSpec spec_;
};

struct CertificateCheck {
  std::string name;
  bool passed = true;
  std::string witness;
  std::string detail;
};

struct CertificateReport {
  std::vector<CertificateCheck> checks;
  double gamma = 0.0;
  double kappa = 0.0;
  bool all_passed() const;
  const CertificateCheck* find(const std::string& name) const;
};

/// Audits unit strength, divergence support, capacity bound, compact support
/// and the off-S bound theta(e) kappa_i <= gamma < alpha(e). Never throws on
/// a bad flow; failures name a witnessing vertex or edge.
template <class S>
CertificateReport verify_flow_certificate(const BasicFlow<S>& flow, const ThetaSpec& spec);

}  // namespace rwre::flows
