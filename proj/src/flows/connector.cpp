#include "rwre/flows/box_flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace rwre::flows {

using lattice::opposite_slot;
using lattice::unit_step;

namespace {

// Wide enough that a cross-section between the boxes, (2(R+m)+1)^(d-1)
// sites, carries all |dB| paths with room to spare.
int corridor_margin(int d, int R) {
  const double need = std::pow(2.0 * d, 1.0 / (d - 1)) * (2.0 * R + 1.0);
  return static_cast<int>(std::ceil((need - 1.0) / 2.0)) - R + 2;
}

// Dense indexing of the corridor: the bounding box of both boxes widened by
// the margin.
struct Corridor {
  int d = 0;
  Site lo;
  std::array<std::int64_t, lattice::kMaxDim> extent{};
  std::int64_t volume = 1;

  Corridor(const Site& xA, const Site& xB, int R) : d(xA.dim()), lo(xA.dim()) {
    const int m = corridor_margin(d, R);
    for (int j = 0; j < d; ++j) {
      lo[j] = std::min(xA[j], xB[j]) - R - m;
      extent[j] = std::max(xA[j], xB[j]) + R + m - lo[j] + 1;
      volume *= extent[j];
    }
  }

  std::int64_t index(const Site& x) const {
    std::int64_t idx = 0;
    for (int j = 0; j < d; ++j) {
      const std::int64_t c = x[j] - lo[j];
      if (c < 0 || c >= extent[j]) return -1;
      idx = idx * extent[j] + c;
    }
    return idx;
  }

  Site site(std::int64_t idx) const {
    Site x(d);
    for (int j = d - 1; j >= 0; --j) {
      x[j] = lo[j] + idx % extent[j];
      idx /= extent[j];
    }
    return x;
  }
};

enum : std::uint8_t { kFree = 0, kStartA = 1, kEndB = 2, kBlocked = 3 };

}  // namespace

std::pair<double, double> connector_length_constants(int d, int R) {
  lattice::require_dimension(d);
  return {1.0, 2.0 * d * (2.0 * R + 1.0 + 2.0 * corridor_margin(d, R))};
}

ConnectorPaths connector_paths(const Site& xA, const Site& xB, int R, std::size_t count) {
  const int d = xA.dim();
  lattice::require_dimension(d);
  if (xB.dim() != d) throw DimensionError("connector endpoints differ in dimension");
  if (R < 1) throw ParameterError("box radius must be positive");
  const std::int64_t sep = (xB - xA).linf_norm();
  if (sep < 2 * R + 3)
    throw GeometryError("boxes B(xA,R) and B(xB,R) overlap or are too close (|xB-xA|_inf = " +
                        std::to_string(sep) + " < 2R+3)");
  if (count > static_cast<std::size_t>(boundary_size(d, R)))
    throw ParameterError("more connector paths requested than boundary points");

  ConnectorPaths out;
  std::tie(out.K1, out.K2) = connector_length_constants(d, R);
  out.separation = (xB - xA).l1_norm();
  if (count == 0) return out;

  const Corridor cor(xA, xB, R);
  std::vector<std::uint8_t> kind(static_cast<std::size_t>(cor.volume), kFree);
  for (const auto* center : {&xA, &xB})
    for (const Site& s : box_sites(*center, R)) {
      const bool boundary = (s - *center).linf_norm() == R;
      kind[cor.index(s)] = !boundary ? kBlocked : center == &xA ? kStartA : kEndB;
    }

  std::vector<Site> starts;
  for (const Site& s : box_sites(xA, R))
    if ((s - xA).linf_norm() == R) starts.push_back(s);
  std::stable_sort(starts.begin(), starts.end(), [&](const Site& a, const Site& b) {
    return (xB - a).l1_norm() < (xB - b).l1_norm();
  });

  // Net flow g(u, k) on the edge u -> u + e_k, antisymmetric. Lattice edges
  // carry one unit in either direction; boundary points of xA only emit and
  // those of xB only absorb.
  const int nd = 2 * d;
  std::vector<std::int8_t> g(static_cast<std::size_t>(cor.volume * nd), 0);
  std::vector<std::uint8_t> source_used(static_cast<std::size_t>(cor.volume), 0);
  std::vector<std::uint8_t> sink_used(static_cast<std::size_t>(cor.volume), 0);
  std::vector<std::int64_t> nbr(static_cast<std::size_t>(cor.volume * nd), -1);
  for (std::int64_t u = 0; u < cor.volume; ++u) {
    if (kind[u] == kBlocked) continue;
    const Site su = cor.site(u);
    for (int k = 0; k < nd; ++k) {
      const std::int64_t v = cor.index(su + unit_step(d, k));
      if (v >= 0 && kind[v] != kBlocked) nbr[u * nd + k] = v;
    }
  }
  auto capacity = [&](std::int64_t u, std::int64_t v) -> int {
    const auto ku = kind[u], kv = kind[v];
    if (ku == kFree && kv == kFree) return 1;
    if (ku == kStartA) return kv == kFree ? 1 : 0;
    if (kv == kEndB) return ku == kFree ? 1 : 0;
    return 0;
  };

  std::vector<std::int64_t> parent(static_cast<std::size_t>(cor.volume), -2);
  std::vector<std::int8_t> via(static_cast<std::size_t>(cor.volume));
  std::vector<std::int64_t> touched;
  std::deque<std::int64_t> queue;

  // Breadth-first search from the given sources to an unused point of dB(xB).
  // `fresh_only` restricts to edges carrying no flow yet.
  auto search = [&](const std::vector<std::int64_t>& sources, bool fresh_only) -> std::int64_t {
    for (auto t : touched) parent[t] = -2;
    touched.clear();
    queue.clear();
    for (auto s0 : sources) {
      parent[s0] = -1;
      touched.push_back(s0);
      queue.push_back(s0);
    }
    while (!queue.empty()) {
      const std::int64_t u = queue.front();
      queue.pop_front();
      for (int k = 0; k < nd; ++k) {
        const std::int64_t v = nbr[u * nd + k];
        if (v < 0 || parent[v] != -2) continue;
        const int flow = g[u * nd + k];
        if (fresh_only ? (flow != 0 || g[v * nd + opposite_slot(d, k)] != 0 || capacity(u, v) == 0)
                       : capacity(u, v) - flow <= 0)
          continue;
        parent[v] = u;
        via[v] = static_cast<std::int8_t>(k);
        touched.push_back(v);
        if (kind[v] == kEndB && !sink_used[v]) return v;
        queue.push_back(v);
      }
    }
    return -1;
  };
  auto augment = [&](std::int64_t hit) {
    std::int64_t v = hit;
    for (; parent[v] != -1; v = parent[v]) {
      const std::int64_t u = parent[v];
      const int k = via[v];
      ++g[u * nd + k];
      --g[v * nd + opposite_slot(d, k)];
    }
    source_used[v] = 1;
    sink_used[hit] = 1;
  };

  std::size_t routed = 0;
  std::vector<std::int64_t> pending;
  for (const Site& a : starts) {
    if (routed + pending.size() == count) break;
    const std::int64_t src = cor.index(a);
    const std::int64_t hit = search({src}, true);
    if (hit < 0) {
      pending.push_back(src);
      continue;
    }
    augment(hit);
    ++routed;
  }
  // Repair: augmenting paths through the residual graph from any unused
  // boundary point, rerouting earlier paths where needed.
  while (routed < count) {
    std::vector<std::int64_t> sources;
    for (const Site& a : starts)
      if (!source_used[cor.index(a)]) sources.push_back(cor.index(a));
    const std::int64_t hit = search(sources, false);
    if (hit < 0)
      throw GeometryError("connector paths: only " + std::to_string(routed) + " of " + std::to_string(count) +
                          " boundary points can be joined");
    augment(hit);
    ++routed;
  }

  // Decompose the unit flow into simple paths, dropping any loops.
  std::vector<std::int64_t> where(static_cast<std::size_t>(cor.volume), -1);
  for (const Site& a : starts) {
    const std::int64_t src = cor.index(a);
    if (!source_used[src]) continue;
    std::vector<std::int64_t> verts{src};
    std::vector<int> slots;
    where[src] = 0;
    std::int64_t u = src;
    while (kind[u] != kEndB) {
      int k = 0;
      while (k < nd && g[u * nd + k] != 1) ++k;
      if (k == nd) throw NumericError("connector flow lost conservation at " + cor.site(u).to_string());
      const std::int64_t v = nbr[u * nd + k];
      if (where[v] >= 0) {
        // close the loop v -> ... -> u -> v and cut it out
        g[u * nd + k] = 0;
        g[v * nd + opposite_slot(d, k)] = 0;
        for (auto i = static_cast<std::size_t>(where[v]); i < slots.size(); ++i) {
          const std::int64_t x = verts[i];
          g[x * nd + slots[i]] = 0;
          g[verts[i + 1] * nd + opposite_slot(d, slots[i])] = 0;
          where[verts[i + 1]] = -1;
        }
        verts.resize(static_cast<std::size_t>(where[v]) + 1);
        slots.resize(static_cast<std::size_t>(where[v]));
        u = v;
        continue;
      }
      slots.push_back(k);
      verts.push_back(v);
      where[v] = static_cast<std::int64_t>(verts.size()) - 1;
      u = v;
    }
    std::vector<LatticeEdge> path;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      g[verts[i] * nd + slots[i]] = 0;
      g[verts[i + 1] * nd + opposite_slot(d, slots[i])] = 0;
      path.push_back({cor.site(verts[i]), slots[i]});
    }
    for (auto x : verts) where[x] = -1;
    out.max_length = std::max(out.max_length, path.size());
    out.paths.push_back(std::move(path));
  }
  return out;
}

ConnectorAudit audit_connector_paths(const ConnectorPaths& c, const Site& xA, const Site& xB, int R) {
  auto fail = [](std::string why) { return ConnectorAudit{false, std::move(why)}; };
  const int d = xA.dim();
  const double bound = c.K1 * static_cast<double>((xB - xA).l1_norm()) + c.K2;
  std::set<std::pair<std::vector<std::int64_t>, int>> edges;
  auto key = [](const Site& s) { return std::vector<std::int64_t>(s.data(), s.data() + s.dim()); };
  std::unordered_set<Site, lattice::SiteHash> starts, ends;

  for (std::size_t p = 0; p < c.paths.size(); ++p) {
    const auto& path = c.paths[p];
    const std::string tag = "path " + std::to_string(p) + ": ";
    if (path.empty()) return fail(tag + "empty");
    if (static_cast<double>(path.size()) > bound)
      return fail(tag + "length " + std::to_string(path.size()) + " exceeds K1*N+K2");
    const Site a = path.front().from, b = path.back().to();
    if ((a - xA).linf_norm() != R) return fail(tag + "does not start on the boundary of the first box");
    if ((b - xB).linf_norm() != R) return fail(tag + "does not end on the boundary of the second box");
    if (!starts.insert(a).second) return fail(tag + "start point " + a.to_string() + " reused");
    if (!ends.insert(b).second) return fail(tag + "end point " + b.to_string() + " reused");
    std::unordered_set<Site, lattice::SiteHash> seen{a};
    for (std::size_t k = 0; k < path.size(); ++k) {
      const auto& e = path[k];
      if (k > 0 && !(e.from == path[k - 1].to())) return fail(tag + "not contiguous");
      const Site t = e.to();
      if (k + 1 < path.size() && (in_box(xA, R, t) || in_box(xB, R, t)))
        return fail(tag + "enters a box at " + t.to_string());
      if (!seen.insert(t).second) return fail(tag + "not simple at " + t.to_string());
      if (!edges.insert({key(e.from), e.slot}).second)
        return fail(tag + "edge " + e.from.to_string() + "->" + t.to_string() + " used twice");
      if (edges.count({key(t), lattice::opposite_slot(d, e.slot)}))
        return fail(tag + "edge " + e.from.to_string() + "->" + t.to_string() + " used in both directions");
    }
  }
  return {};
}

}  // namespace rwre::flows
