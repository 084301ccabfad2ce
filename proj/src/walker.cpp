#include "rwre/walker.hpp"

#include "rwre/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <unordered_map>

namespace rwre::walk {

using lattice::unit_step;

std::vector<Site> Trajectory::positions() const {
  std::vector<Site> out;
  out.reserve(steps.size() + 1);
  const int d = start.dim();
  Site x = start;
  out.push_back(x);
  for (auto s : steps) {
    x = x + unit_step(d, s);
    out.push_back(x);
  }
  return out;
}

Site Trajectory::end() const {
  const int d = start.dim();
  Site x = start;
  for (auto s : steps) x[s % d] += s < d ? 1 : -1;
  return x;
}

std::vector<double> Trajectory::projections(const Eigen::VectorXd& l) const {
  const int d = start.dim();
  std::vector<double> out;
  out.reserve(steps.size() + 1);
  double v = start.dot(l);
  out.push_back(v);
  for (auto s : steps) {
    v += (s < d ? 1.0 : -1.0) * l[s % d];
    out.push_back(v);
  }
  return out;
}

Rng walker_rng(std::uint64_t master_seed, std::uint64_t walker_id) {
  return Rng(domain_seed(master_seed, SeedDomain::walker, static_cast<std::int64_t>(walker_id)));
}

int choose_slot(const SiteDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  const int n = dist.size();
  for (int k = 0; k < n - 1; ++k) {
    acc += dist[k];
    if (u < acc) return k;
  }
  return n - 1;
}

Site step(const QuenchedEnvironment& env, const Site& x, Rng& rng) {
  return x + unit_step(x.dim(), choose_slot(env.site(x), rng));
}

Trajectory walk(const QuenchedEnvironment& env, const Site& start, std::int64_t horizon, Rng& rng) {
  Trajectory t{start, {}, true};
  t.steps.reserve(static_cast<std::size_t>(std::max<std::int64_t>(horizon, 0)));
  const int d = start.dim();
  Site x = start;
  for (std::int64_t n = 0; n < horizon; ++n) {
    const int k = choose_slot(env.site(x), rng);
    t.steps.push_back(static_cast<std::uint8_t>(k));
    x[k % d] += k < d ? 1 : -1;
  }
  return t;
}

ProjectedPath walk_projected(const QuenchedEnvironment& env, const Site& start,
                             const Eigen::VectorXd& l, std::int64_t horizon, Rng& rng) {
  ProjectedPath p;
  p.level.reserve(static_cast<std::size_t>(horizon) + 1);
  const int d = start.dim();
  Site x = start;
  double v = start.dot(l);
  p.level.push_back(v);
  for (std::int64_t n = 0; n < horizon; ++n) {
    const int k = choose_slot(env.site(x), rng);
    const int sign = k < d ? 1 : -1;
    x[k % d] += sign;
    v += sign * l[k % d];
    p.level.push_back(v);
  }
  p.end = x;
  return p;
}

ExitRun run_until_exit(const QuenchedEnvironment& env, const Site& start, const Region& region,
                       std::int64_t horizon, Rng& rng) {
  if (!region(start)) throw ContractError("walk start " + start.to_string() + " is not in the region");
  ExitRun run{Trajectory{start, {}, false}, std::nullopt};
  const int d = start.dim();
  Site x = start;
  for (std::int64_t n = 0; n < horizon; ++n) {
    const int k = choose_slot(env.site(x), rng);
    run.trajectory.steps.push_back(static_cast<std::uint8_t>(k));
    x[k % d] += k < d ? 1 : -1;
    if (!region(x)) {
      run.exit_site = x;
      return run;
    }
  }
  run.trajectory.horizon_hit = true;
  return run;
}

double ExitDistribution::total() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

double ExitDistribution::prob(const Site& x) const {
  for (std::size_t i = 0; i < sites.size(); ++i)
    if (sites[i] == x) return probs[i];
  return 0.0;
}

ExitDistribution exact_exit_distribution(const std::function<SiteDistribution(const Site&)>& omega,
                                         std::span<const Site> region, const Site& start,
                                         std::size_t cap) {
  if (region.size() > cap)
    throw ParameterError("region of " + std::to_string(region.size()) +
                         " sites exceeds the exact solver cap " + std::to_string(cap));
  std::unordered_map<Site, int, lattice::SiteHash> index;
  index.reserve(region.size() * 2);
  for (const Site& x : region) index.try_emplace(x, static_cast<int>(index.size()));
  const auto it_start = index.find(start);
  if (it_start == index.end())
    throw ContractError("exit solver start " + start.to_string() + " is not in the region");

  const int n = static_cast<int>(index.size());
  const int d = start.dim();
  std::vector<Site> sites(static_cast<std::size_t>(n));
  for (const auto& [x, i] : index) sites[static_cast<std::size_t>(i)] = x;

  // Green's function row from `start`: (I - P)^T g = e_start. Exit mass at a
  // boundary site b is sum over x in region, x + e = b, of g(x) omega(x, e).
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * (2 * d + 1));
  std::vector<SiteDistribution> dists(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    dists[i] = omega(sites[i]);
    triplets.emplace_back(i, i, 1.0);
    for (int k = 0; k < 2 * d; ++k) {
      const auto it = index.find(sites[i] + unit_step(d, k));
      if (it != index.end()) triplets.emplace_back(it->second, i, -dists[i][k]);
    }
  }
  Eigen::SparseMatrix<double> At(n, n);
  At.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(At);
  if (lu.info() != Eigen::Success) throw NumericError("exit solver factorization failed");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[it_start->second] = 1.0;
  const Eigen::VectorXd g = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !g.allFinite()) throw NumericError("exit solver solve failed");

  std::unordered_map<Site, double, lattice::SiteHash> mass;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 2 * d; ++k) {
      const Site y = sites[i] + unit_step(d, k);
      if (!index.contains(y)) mass[y] += g[i] * dists[i][k];
    }
  }
  std::vector<std::pair<Site, double>> sorted(mass.begin(), mass.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::lexicographical_compare(a.first.data(), a.first.data() + a.first.dim(),
                                        b.first.data(), b.first.data() + b.first.dim());
  });
  ExitDistribution out;
  for (auto& [x, p] : sorted) {
    out.sites.push_back(x);
    out.probs.push_back(std::max(p, 0.0));
  }
  if (std::abs(out.total() - 1.0) > 1e-9)
    throw NumericError("exit distribution mass " + std::to_string(out.total()) + " differs from 1");
  return out;
}

ExitDistribution exact_exit_distribution(const QuenchedEnvironment& env,
                                         std::span<const Site> region, const Site& start,
                                         std::size_t cap) {
  return exact_exit_distribution([&env](const Site& x) { return env.site(x); }, region, start, cap);
}

StoppingTimes detect_stopping_times(const Trajectory& trajectory, const Eigen::VectorXd& l,
                                    std::span<const double> levels, const Region& region) {
  StoppingTimes st;
  const std::vector<double> proj = trajectory.projections(l);
  const double base = proj.front();
  st.level_times.assign(levels.size(), std::nullopt);
  st.lower_level_times.assign(levels.size(), std::nullopt);
  for (std::size_t n = 0; n < proj.size(); ++n) {
    const double v = proj[n];
    for (std::size_t j = 0; j < levels.size(); ++j) {
      if (!st.level_times[j] && v >= levels[j]) st.level_times[j] = static_cast<std::int64_t>(n);
      if (!st.lower_level_times[j] && v <= levels[j])
        st.lower_level_times[j] = static_cast<std::int64_t>(n);
    }
    if (!st.backtrack_time && v < base) st.backtrack_time = static_cast<std::int64_t>(n);
  }
  if (region) {
    const std::vector<Site> pos = trajectory.positions();
    for (std::size_t n = 0; n < pos.size(); ++n) {
      if (!region(pos[n])) {
        st.exit_time = static_cast<std::int64_t>(n);
        break;
      }
    }
  }
  return st;
}

}  // namespace rwre::walk
